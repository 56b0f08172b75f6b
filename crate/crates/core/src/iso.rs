//! Isomorphisms between fixed-point algebras over bundles of different index.
//!
//! `B_{n,l1}(m)` and `B_{n,l2}(m)` are isomorphic when `gcd(m)` divides
//! `l1 - l2`. Writing `l1 - l2 = Σ c_i m_i`, the loop
//! `H(t) = ⊕ e^{2πi c_i t} 1_{m_i}` commutes with every `m`-block-diagonal
//! matrix and has winding index `l1 - l2`. Conjugating chart 1 by `H` moves a
//! section to the bundle sewn by `V H*`, whose index is `l2`.

use serde::{Deserialize, Serialize};

use crate::bundle::{Bundle2, Section};
use crate::cmatrix::{phase, BlockStructure, CMatrix, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::loops::{UnitaryLoop, MIN_SAMPLES};

/// Text attached to every `CriterionFails` verdict. Only one direction of the
/// gcd criterion is proved constructively here.
pub const CONVERSE_ANNOTATION: &str = "non-isomorphic (converse asserted without proof)";

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn gcd_all(m: &[usize]) -> u64 {
    m.iter().fold(0, |g, &x| gcd(g, x as u64))
}

/// `(g, x, y)` with `g = gcd(a, b) = x a + y b`. When `a` already divides `b`
/// the answer is `(a, 1, 0)`.
fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if a != 0 && b % a == 0 {
        return (a, 1, 0);
    }
    if b == 0 {
        return (a, 1, 0);
    }
    let (g, x, y) = ext_gcd(b, a % b);
    (g, y, x - (a / b) * y)
}

/// Integers `c` with `Σ c_i m_i = diff`, or `None` when `gcd(m)` does not
/// divide `diff`.
///
/// Coefficients come from iterated extended Euclid, then a pairwise descent
/// shifts along each two-term kernel direction while `Σ |c_i|` strictly
/// decreases. The result is small but not necessarily globally minimal.
pub fn solve_block_combination(m: &[usize], diff: i64) -> Option<Vec<i64>> {
    if m.is_empty() || m.contains(&0) {
        return None;
    }
    let m: Vec<i64> = m.iter().map(|&x| x as i64).collect();
    let mut g = m[0];
    let mut c = vec![1i64];
    for &mi in &m[1..] {
        let (g2, x, y) = ext_gcd(g, mi);
        for ci in c.iter_mut() {
            *ci *= x;
        }
        c.push(y);
        g = g2;
    }
    if diff % g != 0 {
        return None;
    }
    let scale = diff / g;
    for ci in c.iter_mut() {
        *ci *= scale;
    }
    descend(&m, &mut c);
    debug_assert_eq!(c.iter().zip(&m).map(|(a, b)| a * b).sum::<i64>(), diff);
    Some(c)
}

fn descend(m: &[i64], c: &mut [i64]) {
    let cost = |a: i64, b: i64| a.abs() + b.abs();
    loop {
        let mut improved = false;
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                let g = gcd(m[i] as u64, m[j] as u64) as i64;
                let (di, dj) = (m[j] / g, m[i] / g);
                // c_i + t di, c_j - t dj; the cost is convex in t with kinks
                // near -c_i/di and c_j/dj
                let mut best = (cost(c[i], c[j]), 0);
                for anchor in [-c[i] / di, c[j] / dj] {
                    for t in anchor - 1..=anchor + 1 {
                        let v = cost(c[i] + t * di, c[j] - t * dj);
                        if v < best.0 {
                            best = (v, t);
                        }
                    }
                }
                if best.1 != 0 {
                    c[i] += best.1 * di;
                    c[j] -= best.1 * dj;
                    improved = true;
                }
            }
        }
        if !improved {
            return;
        }
    }
}

/// Samples `H(j/M) = ⊕ e^{2πi c_i j/M} 1_{m_i}`.
///
/// Requires `M >= 16`, `M > 4 max |c_i|` and `M > 4 |Σ c_i m_i|`, so that
/// every entry and the determinant move by less than a quarter turn per step.
pub fn phase_block_loop(c: &[i64], m: &BlockStructure, samples: usize) -> Result<UnitaryLoop> {
    if c.len() != m.len() {
        return Err(Error::Parameter(format!("{} coefficients for {} blocks", c.len(), m.len())));
    }
    if !m.is_simple() {
        return Err(Error::Parameter("phase loops are built for multiplicity-one block data".into()));
    }
    let total: i64 = c.iter().zip(m.blocks()).map(|(&ci, &mi)| ci * mi as i64).sum();
    let fastest = c.iter().map(|ci| ci.unsigned_abs()).max().unwrap_or(0).max(total.unsigned_abs());
    let m_len = samples as u64;
    if samples < MIN_SAMPLES || m_len <= 4 * fastest {
        return Err(Error::Undersampled {
            index: 0,
            step: std::f64::consts::TAU * fastest as f64 / samples.max(1) as f64,
        });
    }
    let diag_at = |j: usize| -> Vec<crate::cmatrix::C64> {
        c.iter()
            .zip(m.blocks())
            .flat_map(|(&ci, &mi)| {
                let turns = (ci * j as i64).rem_euclid(samples as i64) as f64 / samples as f64;
                std::iter::repeat_n(phase(std::f64::consts::TAU * turns), mi)
            })
            .collect()
    };
    UnitaryLoop::new((0..samples).map(|j| CMatrix::diag(&diag_at(j))).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CertificateRepr", into = "CertificateRepr")]
pub struct IsoCertificate {
    blocks: BlockStructure,
    l1: i64,
    l2: i64,
    c: Vec<i64>,
    phase_loop: UnitaryLoop,
}

impl IsoCertificate {
    /// Checks every certificate invariant: the integer identity, block
    /// diagonality of the phase loop, its start at the identity and its
    /// winding index.
    pub fn new(blocks: BlockStructure, l1: i64, l2: i64, c: Vec<i64>, phase_loop: UnitaryLoop) -> Result<Self> {
        let bad = |msg: String| Err(Error::CertificateMismatch(msg));
        if !blocks.is_simple() {
            return bad("certificate blocks must have multiplicity one".into());
        }
        if c.len() != blocks.len() {
            return bad(format!("{} coefficients for {} blocks", c.len(), blocks.len()));
        }
        let total: i64 = c.iter().zip(blocks.blocks()).map(|(&ci, &mi)| ci * mi as i64).sum();
        if total != l1 - l2 {
            return bad(format!("Σ c_i m_i = {total}, but l1 - l2 = {}", l1 - l2));
        }
        if phase_loop.n() != blocks.total_dim() {
            return bad(format!("phase loop has size {} but the blocks sum to {}", phase_loop.n(), blocks.total_dim()));
        }
        if phase_loop.sample(0).max_abs_diff(&CMatrix::identity(phase_loop.n())) > DEFAULT_TOL {
            return bad("phase loop does not start at the identity".into());
        }
        for (j, s) in phase_loop.samples().iter().enumerate() {
            if blocks.pattern_residual(s)? > DEFAULT_TOL {
                return bad(format!("phase loop is not block-diagonal at sample {j}"));
            }
        }
        let index = phase_loop.winding_index()?;
        if index != total {
            return bad(format!("phase loop winds {index} times, expected {total}"));
        }
        Ok(Self { blocks, l1, l2, c, phase_loop })
    }

    pub fn n(&self) -> usize {
        self.blocks.total_dim()
    }

    pub fn blocks(&self) -> &BlockStructure {
        &self.blocks
    }

    pub fn l1(&self) -> i64 {
        self.l1
    }

    pub fn l2(&self) -> i64 {
        self.l2
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.c
    }

    pub fn phase_loop(&self) -> &UnitaryLoop {
        &self.phase_loop
    }

    /// `V · H*`, the sewing of the target bundle. Equal to `H* V` when `V`
    /// commutes with `H`, as every diagonal sewing does.
    pub fn transformed_sewing(&self, sewing: &UnitaryLoop) -> Result<UnitaryLoop> {
        sewing.pointwise_product(&self.phase_loop.pointwise_adjoint()?)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateRepr {
    m: Vec<usize>,
    l1: i64,
    l2: i64,
    c: Vec<i64>,
    phase_loop: UnitaryLoop,
}

impl TryFrom<CertificateRepr> for IsoCertificate {
    type Error = Error;
    fn try_from(r: CertificateRepr) -> Result<Self> {
        IsoCertificate::new(BlockStructure::simple(r.m)?, r.l1, r.l2, r.c, r.phase_loop)
    }
}

impl From<IsoCertificate> for CertificateRepr {
    fn from(c: IsoCertificate) -> Self {
        CertificateRepr { m: c.blocks.blocks().to_vec(), l1: c.l1, l2: c.l2, c: c.c, phase_loop: c.phase_loop }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IsoVerdict {
    Isomorphic { certificate: IsoCertificate, transformed_index: i64 },
    CriterionFails { gcd: u64, diff: i64, annotation: String },
}

/// The gcd criterion for `B_{n,l1}(m) ≅ B_{n,l2}(m)` on `samples`-point loops.
///
/// On success the certificate is verified numerically: the sewing
/// `V_{l1} H*` built from `diag(z^{l1}, 1, .., 1)` has winding index `l2`.
pub fn isomorphism_check(n: usize, m: &[usize], l1: i64, l2: i64, samples: usize) -> Result<IsoVerdict> {
    let blocks = BlockStructure::simple(m.to_vec())?;
    if blocks.total_dim() != n {
        return Err(Error::Parameter(format!("blocks sum to {}, not n = {n}", blocks.total_dim())));
    }
    let diff = l1 - l2;
    let Some(c) = solve_block_combination(m, diff) else {
        return Ok(IsoVerdict::CriterionFails { gcd: gcd_all(m), diff, annotation: CONVERSE_ANNOTATION.into() });
    };
    let phase_loop = phase_block_loop(&c, &blocks, samples)?;
    let certificate = IsoCertificate::new(blocks, l1, l2, c, phase_loop)?;
    let source = UnitaryLoop::diagonal_power(n, l1, samples)?;
    let transformed_index = certificate.transformed_sewing(&source)?.winding_index()?;
    if transformed_index != l2 {
        return Err(Error::CertificateMismatch(format!(
            "transformed sewing winds {transformed_index} times, expected {l2}"
        )));
    }
    Ok(IsoVerdict::Isomorphic { certificate, transformed_index })
}

/// `(f1, f2) ↦ (H f1 H*, f2)` onto the bundle sewn by `V H*`.
///
/// `H` extends over chart 1 by angle only; the center value of `f1` is kept.
/// This is continuous exactly when `f1(0)` commutes with `H`, which holds
/// when the fixed point sits at the chart-1 center.
pub fn transport_section(s: &Section, cert: &IsoCertificate) -> Result<Section> {
    let sewing = s.bundle().sewing();
    if s.bundle().n() != cert.n() {
        return Err(Error::CertificateMismatch(format!(
            "section has size {} but the certificate is for n = {}",
            s.bundle().n(),
            cert.n()
        )));
    }
    if sewing.sample_count() != cert.phase_loop.sample_count() {
        return Err(Error::CertificateMismatch(format!(
            "sewing has {} samples but the phase loop has {}",
            sewing.sample_count(),
            cert.phase_loop.sample_count()
        )));
    }
    let index = sewing.winding_index()?;
    if index != cert.l1 {
        return Err(Error::CertificateMismatch(format!(
            "section sewing winds {index} times, certificate starts at {}",
            cert.l1
        )));
    }
    let bundle = Bundle2::new(cert.transformed_sewing(sewing)?)?;
    let adjoints: Vec<CMatrix> = cert.phase_loop.samples().iter().map(CMatrix::adjoint).collect();
    let (_, grid, f1, f2) = s.clone().into_parts();
    let mut f1 = f1;
    for ring in f1.rings.iter_mut() {
        for (j, value) in ring.iter_mut().enumerate() {
            *value = value.conjugate_by(&adjoints[j]);
        }
    }
    Section::new(bundle, grid, f1, f2)
}
