//! Sampled unitary loops `S^1 -> U(n)` and their winding index.
//!
//! A loop is stored as `M` samples at `t_j = j / M`; the sample at `t = 1`
//! is identified with `t = 0`. Loops are kept as `U(n)` lifts. Two lifts of
//! the same projective loop can differ in index by a multiple of `n`, which
//! is what the mod-`n` bundle classification absorbs.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

use crate::cmatrix::{phase, CMatrix, C64, DEFAULT_TOL};
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 16;

/// Successive det phase steps must stay strictly below this.
pub const MAX_PHASE_STEP: f64 = FRAC_PI_2;

/// Sample count used when loops are built from a shorthand.
pub const DEFAULT_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopRepr", into = "LoopRepr")]
pub struct UnitaryLoop {
    n: usize,
    samples: Vec<CMatrix>,
}

impl UnitaryLoop {
    /// Checks shape only: at least [`MIN_SAMPLES`] samples, all `n x n`.
    /// Unitarity and sampling density are reported by [`UnitaryLoop::validate`].
    pub fn new(samples: Vec<CMatrix>) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::Parameter(format!(
                "a loop needs at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        let n = samples[0].dim();
        if let Some(bad) = samples.iter().find(|s| s.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.dim() });
        }
        Ok(Self { n, samples })
    }

    /// Samples `f(t_j)` for `t_j = j / m`.
    pub fn from_fn(m: usize, f: impl Fn(f64) -> CMatrix) -> Result<Self> {
        Self::new((0..m).map(|j| f(j as f64 / m as f64)).collect())
    }

    pub fn constant(u: &CMatrix, m: usize) -> Result<Self> {
        Self::new(vec![u.clone(); m])
    }

    /// `t -> diag(e^{2πi k t}, 1, .., 1)` for any integer `k`.
    pub fn diagonal_power(n: usize, k: i64, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("loop dimension must be positive".into()));
        }
        Self::new(
            (0..m)
                .map(|j| {
                    let mut d = CMatrix::identity(n);
                    // reduce k*j mod m first so the angle stays exact for large j
                    let r = (k * j as i64).rem_euclid(m as i64) as f64;
                    d.set(0, 0, phase(TAU * r / m as f64));
                    d
                })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[CMatrix] {
        &self.samples
    }

    pub fn sample(&self, j: usize) -> &CMatrix {
        &self.samples[j]
    }

    fn check_same_shape(&self, other: &UnitaryLoop) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        if self.samples.len() != other.samples.len() {
            return Err(Error::Malformed(format!(
                "sample counts differ: {} vs {}",
                self.samples.len(),
                other.samples.len()
            )));
        }
        Ok(())
    }

    fn require_unitary(self) -> Result<Self> {
        let report = self.validate(DEFAULT_TOL);
        match report.non_unitary.first() {
            Some(bad) => Err(Error::Malformed(format!(
                "sample {} is not unitary (residual {:.3e})",
                bad.index, bad.residual
            ))),
            None => Ok(self),
        }
    }

    /// Sample-wise `a(t) b(t)`.
    pub fn pointwise_product(&self, other: &UnitaryLoop) -> Result<UnitaryLoop> {
        self.check_same_shape(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b).collect();
        UnitaryLoop { n: self.n, samples }.require_unitary()
    }

    /// Sample-wise `a(t)*`.
    pub fn pointwise_adjoint(&self) -> Result<UnitaryLoop> {
        let samples = self.samples.iter().map(CMatrix::adjoint).collect();
        UnitaryLoop { n: self.n, samples }.require_unitary()
    }

    /// `u · a(t)`.
    pub fn left_mul(&self, u: &CMatrix) -> Result<UnitaryLoop> {
        self.map_samples(u, |s| u * s)
    }

    /// `a(t) · u`.
    pub fn right_mul(&self, u: &CMatrix) -> Result<UnitaryLoop> {
        self.map_samples(u, |s| s * u)
    }

    /// `u* a(t) u`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<UnitaryLoop> {
        self.map_samples(u, |s| s.conjugate_by(u))
    }

    fn map_samples(&self, u: &CMatrix, f: impl Fn(&CMatrix) -> CMatrix) -> Result<UnitaryLoop> {
        if u.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: u.dim() });
        }
        UnitaryLoop { n: self.n, samples: self.samples.iter().map(f).collect() }.require_unitary()
    }

    /// Doubles the resolution: between `a_j` and `a_{j+1}` inserts
    /// `a_j · diag(e^{iδ/2}, 1, .., 1)`, where `δ` is the principal det
    /// phase step, so the inserted det phase is the geodesic midpoint.
    pub fn refine_midpoints(&self) -> Result<UnitaryLoop> {
        let dets = self.determinants()?;
        let m = self.samples.len();
        let mut samples = Vec::with_capacity(2 * m);
        for j in 0..m {
            let step = principal_step(dets[j], dets[(j + 1) % m]);
            let mut half = CMatrix::identity(self.n);
            half.set(0, 0, phase(step / 2.0));
            samples.push(self.samples[j].clone());
            samples.push(&self.samples[j] * &half);
        }
        Ok(UnitaryLoop { n: self.n, samples })
    }

    fn determinants(&self) -> Result<Vec<C64>> {
        self.samples
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let d = s.determinant();
                if d.norm() <= f64::MIN_POSITIVE {
                    Err(Error::SingularSample(j))
                } else {
                    Ok(d)
                }
            })
            .collect()
    }

    /// Principal det phase steps `j -> j+1`, the last entry being the
    /// closing step `M-1 -> 0`.
    pub fn phase_steps(&self) -> Result<Vec<f64>> {
        let dets = self.determinants()?;
        let m = dets.len();
        Ok((0..m).map(|j| principal_step(dets[j], dets[(j + 1) % m])).collect())
    }

    /// `(2π)^{-1}` times the unwrapped increment of `arg det` around the loop.
    ///
    /// Steps are accumulated strictly in sample order. Every step, including
    /// the closing one, must be below `π/2` in magnitude, and the total must
    /// lie within 0.1 turn of an integer.
    pub fn winding_index(&self) -> Result<i64> {
        let steps = self.phase_steps()?;
        let (worst, &step) = steps
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("non-empty loop");
        if step.abs() >= MAX_PHASE_STEP {
            return Err(Error::Undersampled { index: worst, step });
        }
        let mut total = 0.0;
        for s in steps {
            total += s;
        }
        let turns = total / TAU;
        let rounded = turns.round();
        if (turns - rounded).abs() > 0.1 {
            return Err(Error::InconsistentLoop { turns });
        }
        Ok(rounded as i64)
    }

    /// Lists non-unitary samples, density violations and closure violations.
    pub fn validate(&self, tol: f64) -> LoopReport {
        let non_unitary: Vec<SampleResidual> = self
            .samples
            .iter()
            .enumerate()
            .filter_map(|(index, s)| {
                let residual = s.unitarity_residual();
                (residual > tol).then_some(SampleResidual { index, residual })
            })
            .collect();

        let mut report = LoopReport { non_unitary, ..LoopReport::default() };
        match self.phase_steps() {
            Err(Error::SingularSample(j)) => report.singular = Some(j),
            Err(e) => unreachable!("phase_steps only fails on singular samples: {e}"),
            Ok(steps) => {
                let m = steps.len();
                let (worst, &step) = steps
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                    .expect("non-empty loop");
                report.max_phase_step = step.abs();
                report.density_violations = steps[..m - 1]
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.abs() >= MAX_PHASE_STEP)
                    .map(|(index, &step)| PhaseStep { index, step })
                    .collect();
                if steps[m - 1].abs() >= MAX_PHASE_STEP {
                    report.closure_violation = Some(PhaseStep { index: m - 1, step: steps[m - 1] });
                }
                report.worst_step = Some(PhaseStep { index: worst, step });
            }
        }
        report
    }
}

/// `arg(b / a)` in `(-π, π]`.
fn principal_step(a: C64, b: C64) -> f64 {
    (b * a.conj()).arg()
}

/// `V_k: t -> diag(e^{2πi k t}, 1, .., 1)`, `0 <= k < n`, sampled at `m` points.
pub fn canonical_loop(n: usize, k: usize, m: usize) -> Result<UnitaryLoop> {
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    if k >= n {
        return Err(Error::Parameter(format!("canonical index k = {k} must be below n = {n}")));
    }
    if m < MIN_SAMPLES {
        return Err(Error::Parameter(format!("M = {m} is below the minimum {MIN_SAMPLES}")));
    }
    UnitaryLoop::diagonal_power(n, k as i64, m)
}

/// Parses `canonical:n,k,M`.
pub fn parse_canonical_shorthand(s: &str) -> Result<UnitaryLoop> {
    let rest = s
        .strip_prefix("canonical:")
        .ok_or_else(|| Error::Malformed(format!("`{s}` is not of the form canonical:n,k,M")))?;
    let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
    let parsed: std::result::Result<Vec<usize>, _> = parts.iter().map(|p| p.parse()).collect();
    match parsed.as_deref() {
        Ok([n, k, m]) => canonical_loop(*n, *k, *m),
        Ok([n, k]) => canonical_loop(*n, *k, DEFAULT_SAMPLES),
        _ => Err(Error::Malformed(format!("`{s}` is not of the form canonical:n,k,M"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleResidual {
    pub index: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseStep {
    pub index: usize,
    pub step: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LoopReport {
    pub non_unitary: Vec<SampleResidual>,
    pub singular: Option<usize>,
    pub density_violations: Vec<PhaseStep>,
    pub closure_violation: Option<PhaseStep>,
    pub max_phase_step: f64,
    pub worst_step: Option<PhaseStep>,
}

impl LoopReport {
    pub fn is_empty(&self) -> bool {
        self.non_unitary.is_empty()
            && self.singular.is_none()
            && self.density_violations.is_empty()
            && self.closure_violation.is_none()
    }
}

/// Wire form `{"n": int, "M": int, "samples": [matrix, ..]}`.
#[derive(Serialize, Deserialize)]
struct LoopRepr {
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    samples: Vec<CMatrix>,
}

impl TryFrom<LoopRepr> for UnitaryLoop {
    type Error = Error;
    fn try_from(r: LoopRepr) -> Result<Self> {
        if r.samples.len() != r.m {
            return Err(Error::Malformed(format!("M = {} but {} samples given", r.m, r.samples.len())));
        }
        let lp = UnitaryLoop::new(r.samples)?;
        if lp.n != r.n {
            return Err(Error::DimensionMismatch { expected: r.n, found: lp.n });
        }
        Ok(lp)
    }
}

impl From<UnitaryLoop> for LoopRepr {
    fn from(l: UnitaryLoop) -> Self {
        LoopRepr { n: l.n, m: l.samples.len(), samples: l.samples }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::c;
    use std::f64::consts::PI;

    /// Independent winding oracle: evaluates the analytic loop at 8x the
    /// resolution, takes the determinant by cofactor expansion and sums
    /// principal `atan2` differences.
    fn oracle_index(n: usize, m: usize, f: impl Fn(f64) -> CMatrix) -> i64 {
        fn cofactor_det(a: &CMatrix) -> C64 {
            let n = a.dim();
            if n == 1 {
                return a.get(0, 0);
            }
            (0..n)
                .map(|j| {
                    let minor: Vec<C64> = (1..n)
                        .flat_map(|i| (0..n).filter(move |&k| k != j).map(move |k| (i, k)))
                        .map(|(i, k)| a.get(i, k))
                        .collect();
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    a.get(0, j) * cofactor_det(&CMatrix::from_vec(n - 1, minor).unwrap()) * sign
                })
                .sum()
        }
        let fine = 8 * m;
        let args: Vec<f64> = (0..=fine)
            .map(|j| {
                let d = cofactor_det(&f(j as f64 / fine as f64));
                assert_eq!(f(0.0).dim(), n);
                d.im.atan2(d.re)
            })
            .collect();
        let mut total = 0.0;
        for w in args.windows(2) {
            let mut d = w[1] - w[0];
            while d > PI {
                d -= TAU;
            }
            while d < -PI {
                d += TAU;
            }
            total += d;
        }
        (total / TAU).round() as i64
    }

    fn diag_power(n: usize, k: i64, t: f64) -> CMatrix {
        let mut d = CMatrix::identity(n);
        d.set(0, 0, phase(TAU * k as f64 * t));
        d
    }

    #[test]
    fn canonical_examples() {
        let id = canonical_loop(2, 0, 64).unwrap();
        assert!(id.samples().iter().all(|s| *s == CMatrix::identity(2)));
        let v2 = canonical_loop(3, 2, 256).unwrap();
        for (j, s) in v2.samples().iter().enumerate() {
            let expected = phase(4.0 * PI * j as f64 / 256.0);
            assert!((s.determinant() - expected).norm() < 1e-12);
        }
        let v1 = canonical_loop(2, 1, 64).unwrap();
        assert!(v1.sample(16).max_abs_diff(&CMatrix::diag(&[c(0.0, 1.0), c(1.0, 0.0)])) < 1e-15);
    }

    #[test]
    fn canonical_parameter_errors() {
        assert!(canonical_loop(2, 2, 64).is_err());
        assert!(canonical_loop(2, 1, 8).is_err());
        assert!(canonical_loop(0, 0, 64).is_err());
    }

    #[test]
    fn winding_examples() {
        assert_eq!(canonical_loop(3, 2, 256).unwrap().winding_index().unwrap(), 2);
        let u = CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert_eq!(UnitaryLoop::constant(&u, 32).unwrap().winding_index().unwrap(), 0);

        let a = canonical_loop(3, 1, 1024).unwrap();
        let b = canonical_loop(3, 2, 1024).unwrap();
        let prod = a.pointwise_product(&b).unwrap();
        let expected = oracle_index(3, 1024, |t| &diag_power(3, 1, t) * &diag_power(3, 2, t));
        assert_eq!(expected, 3);
        assert_eq!(prod.winding_index().unwrap(), expected);
    }

    #[test]
    fn product_and_adjoint_examples() {
        let v0 = canonical_loop(2, 0, 64).unwrap();
        let v1 = canonical_loop(2, 1, 64).unwrap();
        assert_eq!(v0.pointwise_product(&v1).unwrap(), v1);

        let adj = v1.pointwise_adjoint().unwrap();
        let expected = oracle_index(2, 64, |t| diag_power(2, 1, t).adjoint());
        assert_eq!(expected, -1);
        assert_eq!(adj.winding_index().unwrap(), expected);

        let one = v1.pointwise_product(&adj).unwrap();
        assert!(one.samples().iter().all(|s| s.max_abs_diff(&CMatrix::identity(2)) < 1e-15));
    }

    #[test]
    fn product_shape_mismatch() {
        let a = canonical_loop(2, 1, 64).unwrap();
        assert!(a.pointwise_product(&canonical_loop(3, 1, 64).unwrap()).is_err());
        assert!(a.pointwise_product(&canonical_loop(2, 1, 32).unwrap()).is_err());
    }

    #[test]
    fn validation_examples() {
        assert!(canonical_loop(2, 1, 64).unwrap().validate(DEFAULT_TOL).is_empty());

        let mut samples = canonical_loop(2, 1, 64).unwrap().samples().to_vec();
        samples[5] = samples[5].scale_real(1.1);
        let report = UnitaryLoop::new(samples).unwrap().validate(DEFAULT_TOL);
        assert_eq!(report.non_unitary.len(), 1);
        assert_eq!(report.non_unitary[0].index, 5);

        // k = 8 at M = 16: two samples per turn, every step is π
        let fast = UnitaryLoop::diagonal_power(2, 8, 16).unwrap();
        let report = fast.validate(DEFAULT_TOL);
        assert!(!report.density_violations.is_empty());
        assert!((report.max_phase_step - PI).abs() < 1e-12);
        assert!(matches!(fast.winding_index(), Err(Error::Undersampled { .. })));
    }

    #[test]
    fn closure_violation_is_reported_separately() {
        // e^{2πi (0.3) t} does not close: the last step jumps back
        let open = UnitaryLoop::from_fn(16, |t| CMatrix::diag(&[phase(TAU * 0.3 * t * 16.0 / 3.0)])).unwrap();
        let report = open.validate(DEFAULT_TOL);
        assert!(report.closure_violation.is_some(), "{report:?}");
        assert!(report.density_violations.is_empty());
    }

    #[test]
    fn refinement_keeps_index() {
        let a = canonical_loop(4, 3, 64).unwrap();
        let r = a.refine_midpoints().unwrap();
        assert_eq!(r.sample_count(), 128);
        assert!(r.validate(DEFAULT_TOL).is_empty());
        assert_eq!(r.winding_index().unwrap(), 3);
    }

    #[test]
    fn shorthand() {
        assert_eq!(parse_canonical_shorthand("canonical:3,2,256").unwrap(), canonical_loop(3, 2, 256).unwrap());
        assert_eq!(parse_canonical_shorthand("canonical:2,1").unwrap().sample_count(), DEFAULT_SAMPLES);
        assert!(parse_canonical_shorthand("canonical:3,x,2").is_err());
        assert!(parse_canonical_shorthand("loop.json").is_err());
    }

    #[test]
    fn json_checks_sample_count() {
        let l = canonical_loop(2, 1, 16).unwrap();
        let mut v = serde_json::to_value(&l).unwrap();
        assert_eq!(v["M"], 16);
        let back: UnitaryLoop = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(back, l);
        v["M"] = serde_json::json!(17);
        assert!(serde_json::from_value::<UnitaryLoop>(v).is_err());
    }
}
