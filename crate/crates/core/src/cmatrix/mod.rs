//! Dense complex square matrices.
//!
//! `CMatrix` is the value type shared by every other module. Sizes here are
//! small (n <= 8 in practice, stacked systems up to a few hundred rows), so
//! storage is a flat row-major `Vec` and all kernels are naive loops.
//!
//! All tolerances taken by the predicates in this module are measured in the
//! max-entry norm `max |a_ij|`.

mod blocks;
mod linalg;
mod stdpoly;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use blocks::BlockStructure;
pub use linalg::{commutant_dimension, hermitian_eigenvalues, rank};
pub use stdpoly::{standard_polynomial, MAX_STANDARD_DEGREE};

/// Default tolerance for structural predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `e^{i phi}`.
#[inline]
pub fn phase(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

#[derive(Clone, PartialEq)]
#[derive(Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Malformed("matrix dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::Malformed(format!(
                "expected {} entries for a {dim}x{dim} matrix, found {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: k / dim, col: k % dim });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Malformed("ragged or non-square row list".into()));
        }
        Self::from_vec(dim, rows.concat())
    }

    /// Real-valued convenience constructor; panics on a ragged list.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows).expect("square finite real rows")
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, c(1.0, 0.0))
    }

    pub fn scalar(dim: usize, lambda: C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = lambda;
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>())
    }

    /// Matrix unit `e_{ij}` (zero-based indices).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[i * dim + j] = c(1.0, 0.0);
        m
    }

    /// Block-diagonal matrix with the given square blocks in order.
    pub fn block_diag(blocks: &[CMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut m = Self::zeros(dim);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m.data[(offset + i) * dim + offset + j] = b.get(i, j);
                }
            }
            offset += b.dim;
        }
        m
    }

    /// `1_d ⊗ a`, i.e. `d` diagonal copies of `a`.
    pub fn repeat_diag(a: &CMatrix, copies: usize) -> Self {
        Self::block_diag(&vec![a.clone(); copies])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        assert!(z.re.is_finite() && z.im.is_finite(), "non-finite entry");
        self.data[i * self.dim + j] = z;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    /// Square sub-block starting at `(offset, offset)`.
    pub fn sub_block(&self, offset: usize, size: usize) -> CMatrix {
        let mut b = Self::zeros(size);
        for i in 0..size {
            for j in 0..size {
                b.data[i * size + j] = self.get(offset + i, offset + j);
            }
        }
        b
    }

    fn check_same_dim(&self, other: &CMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(CMatrix { dim: n, data: out })
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_same_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        CMatrix { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        self.scale(c(s, 0.0))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    /// `u* · self · u`.
    pub fn conjugate_by(&self, u: &CMatrix) -> CMatrix {
        &(&u.adjoint() * self) * u
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Max-entry norm `max |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-entry distance to `other`. Panics on a dimension mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> C64 {
        linalg::determinant(self)
    }

    /// `max |A*A - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// `max(|A - A*|, |A^2 - A|)`.
    pub fn projection_residual(&self) -> f64 {
        let herm = self.max_abs_diff(&self.adjoint());
        let idem = (self * self).max_abs_diff(self);
        herm.max(idem)
    }

    pub fn is_hermitian_projection(&self, tol: f64) -> bool {
        self.projection_residual() <= tol
    }

    /// Largest entry magnitude outside the consecutive diagonal blocks of
    /// `structure`. Multiplicities are ignored here; see
    /// [`BlockStructure::pattern_residual`] for the tensor pattern.
    pub fn off_block_magnitude(&self, structure: &BlockStructure) -> Result<f64> {
        let sizes = structure.block_sizes();
        let total: usize = sizes.iter().sum();
        if total != self.dim {
            return Err(Error::DimensionMismatch { expected: total, found: self.dim });
        }
        let mut owner = Vec::with_capacity(self.dim);
        for (b, &s) in sizes.iter().enumerate() {
            owner.extend(std::iter::repeat_n(b, s));
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if owner[i] != owner[j] {
                    worst = worst.max(self.get(i, j).norm());
                }
            }
        }
        Ok(worst)
    }

    /// True iff every entry outside the diagonal blocks `m_1, .., m_k` has
    /// magnitude at most `tol`. Requires all multiplicities to be 1.
    pub fn is_block_diagonal(&self, structure: &BlockStructure, tol: f64) -> Result<bool> {
        if !structure.is_simple() {
            return Err(Error::Parameter(
                "is_block_diagonal takes multiplicity-one block structures".into(),
            ));
        }
        Ok(self.off_block_magnitude(structure)? <= tol)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>9.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &'a CMatrix) -> CMatrix {
        self.try_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &'a CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum dimension mismatch")
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &'a CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference dimension mismatch")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

/// Wire form: `{"dim": n, "entries": [[[re, im], ..], ..]}`, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<MatrixRepr> for CMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        if r.entries.len() != r.dim || r.entries.iter().any(|row| row.len() != r.dim) {
            return Err(Error::Malformed(format!(
                "entries are not a {0}x{0} array",
                r.dim
            )));
        }
        let data = r.entries.iter().flatten().map(|&[re, im]| c(re, im)).collect();
        CMatrix::from_vec(r.dim, data)
    }
}

impl From<CMatrix> for MatrixRepr {
    fn from(m: CMatrix) -> Self {
        MatrixRepr {
            dim: m.dim,
            entries: m
                .data
                .chunks(m.dim)
                .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unitary_examples() {
        assert!(CMatrix::identity(3).is_unitary(1e-12));
        assert!(!CMatrix::diag_real(&[1.0, 2.0]).is_unitary(1e-12));
        assert!(CMatrix::diag(&[phase(PI / 3.0), phase(-PI / 3.0)]).is_unitary(1e-12));
    }

    #[test]
    fn projection_examples() {
        assert!(CMatrix::diag_real(&[1.0, 0.0]).is_hermitian_projection(1e-12));
        let half = CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(half.is_hermitian_projection(1e-12));
        let nil = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(!nil.is_hermitian_projection(1e-12));
    }

    #[test]
    fn block_diagonal_examples() {
        let ones = BlockStructure::simple(vec![1, 1]).unwrap();
        assert!(CMatrix::diag_real(&[5.0, 7.0]).is_block_diagonal(&ones, 1e-12).unwrap());
        let swap = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(!swap.is_block_diagonal(&ones, 1e-12).unwrap());
        let full = BlockStructure::simple(vec![2]).unwrap();
        assert!(swap.is_block_diagonal(&full, 1e-12).unwrap());
    }

    #[test]
    fn block_diagonal_rejects_wrong_total() {
        let s = BlockStructure::simple(vec![2, 1]).unwrap();
        assert!(matches!(
            CMatrix::identity(2).is_block_diagonal(&s, 1e-9),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_rejects_ragged_and_non_finite() {
        let ragged = r#"{"dim":2,"entries":[[[1,0],[0,0]],[[0,0]]]}"#;
        assert!(serde_json::from_str::<CMatrix>(ragged).is_err());
        let wrong_dim = r#"{"dim":3,"entries":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#;
        assert!(serde_json::from_str::<CMatrix>(wrong_dim).is_err());
        assert!(CMatrix::from_vec(1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = CMatrix::from_rows(&[vec![c(1.0, -2.0), c(0.5, 0.0)], vec![c(0.0, 3.0), c(-1.0, 0.25)]])
            .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"entries":[[[1.0,-2.0],[0.5,0.0]],[[0.0,3.0],[-1.0,0.25]]]}"#);
        let back: CMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn conjugation_and_commutator() {
        let u = CMatrix::diag(&[phase(0.3), phase(-1.1)]);
        let a = CMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = a.conjugate_by(&u);
        assert!((b.get(0, 0) - a.get(0, 0)).norm() < 1e-15);
        assert!((b.get(0, 1) - a.get(0, 1) * phase(-1.4)).norm() < 1e-14);
        assert!(CMatrix::diag_real(&[1.0, 2.0]).commutator(&CMatrix::diag_real(&[3.0, 4.0])).max_abs() == 0.0);
    }
}
