//! The few factorizations the rest of the crate needs: determinant,
//! numerical rank, commutant dimension and Hermitian eigenvalues.

use super::{CMatrix, C64};
use crate::error::{Error, Result};

/// Relative pivot threshold for [`rank`].
pub const RANK_REL_TOL: f64 = 1e-10;

/// Determinant by elimination with partial pivoting; the result is the
/// signed product of the pivots.
pub(super) fn determinant(a: &CMatrix) -> C64 {
    let n = a.dim();
    let mut m = a.entries().to_vec();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let (p, best) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if p != col {
            for j in 0..n {
                m.swap(col * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = m[col * n + col];
        det *= pivot;
        for r in col + 1..n {
            let f = m[r * n + col] / pivot;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = m[col * n + j];
                m[r * n + j] -= f * v;
            }
        }
    }
    det
}

/// Numerical rank of a row-major `rows x cols` complex matrix, by complete
/// pivoting. Elimination stops once the best remaining pivot falls below
/// `RANK_REL_TOL` times the first (largest) pivot.
pub fn rank(rows: usize, cols: usize, data: &[C64]) -> usize {
    assert_eq!(data.len(), rows * cols, "rank: data length mismatch");
    let mut m = data.to_vec();
    let mut row_p: Vec<usize> = (0..rows).collect();
    let mut col_p: Vec<usize> = (0..cols).collect();
    let mut largest = 0.0;
    let mut r = 0;
    while r < rows.min(cols) {
        let mut best = (r, r, 0.0);
        for i in r..rows {
            for j in r..cols {
                let v = m[row_p[i] * cols + col_p[j]].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if r == 0 {
            largest = best.2;
        }
        if largest == 0.0 || best.2 <= RANK_REL_TOL * largest {
            break;
        }
        row_p.swap(r, best.0);
        col_p.swap(r, best.1);
        let pr = row_p[r];
        let pivot = m[pr * cols + col_p[r]];
        for &ri in &row_p[r + 1..] {
            let f = m[ri * cols + col_p[r]] / pivot;
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for &cj in &col_p[r..] {
                let v = m[pr * cols + cj];
                m[ri * cols + cj] -= f * v;
            }
        }
        r += 1;
    }
    r
}

/// Complex dimension of `{X : XA = AX for every A in mats}`.
///
/// Each constraint contributes the `n^2` linear equations
/// `sum_k X_ik A_kj - A_ik X_kj = 0` in the unknowns `X_pq`; the commutant is
/// the kernel of the stacked system.
pub fn commutant_dimension(mats: &[CMatrix]) -> Result<usize> {
    let first = mats.first().ok_or(Error::Empty("commutant of an empty family"))?;
    let n = first.dim();
    if let Some(bad) = mats.iter().find(|m| m.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
    }
    let unknowns = n * n;
    let rows = mats.len() * unknowns;
    let mut sys = vec![C64::new(0.0, 0.0); rows * unknowns];
    for (t, a) in mats.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let row = t * unknowns + i * n + j;
                for k in 0..n {
                    // (XA)_ij picks up X_ik A_kj
                    sys[row * unknowns + i * n + k] += a.get(k, j);
                    // (AX)_ij picks up A_ik X_kj
                    sys[row * unknowns + k * n + j] -= a.get(i, k);
                }
            }
        }
    }
    Ok(unknowns - rank(rows, unknowns, &sys))
}

/// Eigenvalues of the Hermitian part `(A + A*)/2`, ascending.
///
/// Uses the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum
/// is that of the Hermitian matrix with every eigenvalue doubled, followed by
/// cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let n = a.dim();
    let h = &(a + &a.adjoint()).scale_real(0.5);
    let size = 2 * n;
    let mut s = vec![0.0; size * size];
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            s[i * size + j] = z.re;
            s[(i + n) * size + j + n] = z.re;
            s[(i + n) * size + j] = z.im;
            s[i * size + j + n] = -z.im;
        }
    }
    let mut eig = jacobi_symmetric(size, &mut s);
    eig.sort_by(|x, y| x.total_cmp(y));
    eig.into_iter().step_by(2).collect()
}

fn jacobi_symmetric(n: usize, a: &mut [f64]) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale > 0.0 {
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j] * a[i * n + j])
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= 1e-300 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = cs * akp - sn * akq;
                        a[k * n + q] = sn * akp + cs * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = cs * apk - sn * aqk;
                        a[q * n + k] = sn * apk + cs * aqk;
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
