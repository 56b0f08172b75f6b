//! Two-chart algebraic bundles over `S^2` and their sections.
//!
//! The sphere is covered by the closed upper and lower half-spheres, each
//! parametrized as a unit disk sampled on a [`PolarGrid`]. Both disks share
//! the equator `r = 1`, where the sewing loop `V` glues the fibres:
//! `f1(1, θ) = V(θ)* f2(1, θ) V(θ)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::cmatrix::{CMatrix, C64, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::loops::{parse_canonical_shorthand, UnitaryLoop};
use crate::rng::SplitMix64;

/// Default tolerance for equator compatibility.
pub const EQUATOR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BundleRepr")]
pub struct Bundle2 {
    n: usize,
    sewing: UnitaryLoop,
}

impl Bundle2 {
    /// Requires the sewing loop to pass loop validation at the default tolerance.
    pub fn new(sewing: UnitaryLoop) -> Result<Self> {
        let report = sewing.validate(DEFAULT_TOL);
        if !report.is_empty() {
            return Err(Error::Malformed(format!("sewing loop fails validation: {report:?}")));
        }
        Ok(Self { n: sewing.n(), sewing })
    }

    /// The bundle `B_{n,k}` glued by `V_k`.
    pub fn canonical(n: usize, k: usize, m: usize) -> Result<Self> {
        Self::new(crate::loops::canonical_loop(n, k, m)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sewing(&self) -> &UnitaryLoop {
        &self.sewing
    }

    /// Winding index of the sewing loop reduced to `0..n`.
    pub fn classify(&self) -> Result<usize> {
        Ok(self.sewing.winding_index()?.rem_euclid(self.n as i64) as usize)
    }

    pub fn is_isomorphic_to(&self, other: &Bundle2) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(self.classify()? == other.classify()?)
    }
}

pub fn classify_bundle(b: &Bundle2) -> Result<usize> {
    b.classify()
}

pub fn bundles_isomorphic(a: &Bundle2, b: &Bundle2) -> Result<bool> {
    a.is_isomorphic_to(b)
}

/// Either a full loop or the `canonical:n,k,M` shorthand.
#[derive(Deserialize)]
#[serde(untagged)]
enum LoopSource {
    Shorthand(String),
    Full(UnitaryLoop),
}

/// Wire form `{"n": int, "sewing": loop | "canonical:n,k,M"}`.
#[derive(Deserialize)]
struct BundleRepr {
    n: usize,
    sewing: LoopSource,
}

impl TryFrom<BundleRepr> for Bundle2 {
    type Error = Error;
    fn try_from(r: BundleRepr) -> Result<Self> {
        let sewing = match r.sewing {
            LoopSource::Full(l) => l,
            LoopSource::Shorthand(s) => parse_canonical_shorthand(&s)?,
        };
        let b = Bundle2::new(sewing)?;
        if b.n != r.n {
            return Err(Error::DimensionMismatch { expected: r.n, found: b.n });
        }
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Chart {
    /// Upper half-sphere, charted by `f1`.
    Upper,
    /// Lower half-sphere, charted by `f2`.
    Lower,
}

impl TryFrom<u8> for Chart {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Chart::Upper),
            2 => Ok(Chart::Lower),
            _ => Err(Error::Parameter(format!("chart must be 1 or 2, got {v}"))),
        }
    }
}

impl From<Chart> for u8 {
    fn from(c: Chart) -> u8 {
        match c {
            Chart::Upper => 1,
            Chart::Lower => 2,
        }
    }
}

/// Polar sampling of the closed unit disk: radii `i / (R-1)` for
/// `i = 0..R` (index 0 is the center, stored once) and angles `2πj / A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct PolarGrid {
    radial_count: usize,
    angular_count: usize,
}

impl PolarGrid {
    pub fn new(radial_count: usize, angular_count: usize) -> Result<Self> {
        if radial_count < 2 {
            return Err(Error::Parameter(format!("radial_count {radial_count} < 2")));
        }
        if angular_count < 16 {
            return Err(Error::Parameter(format!("angular_count {angular_count} < 16")));
        }
        Ok(Self { radial_count, angular_count })
    }

    pub fn radial_count(&self) -> usize {
        self.radial_count
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    /// Radius index of the equator ring.
    pub fn equator(&self) -> usize {
        self.radial_count - 1
    }

    pub fn radius(&self, i: usize) -> f64 {
        i as f64 / (self.radial_count - 1) as f64
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.angular_count as f64
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    radial_count: usize,
    angular_count: usize,
}

impl TryFrom<GridRepr> for PolarGrid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        PolarGrid::new(r.radial_count, r.angular_count)
    }
}

impl From<PolarGrid> for GridRepr {
    fn from(g: PolarGrid) -> Self {
        GridRepr { radial_count: g.radial_count, angular_count: g.angular_count }
    }
}

/// Samples of a matrix function on one disk chart. `rings[i - 1][j]` is the
/// value at radius index `i >= 1` and angle index `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSamples {
    pub center: CMatrix,
    pub rings: Vec<Vec<CMatrix>>,
}

impl DiskSamples {
    /// Samples `f(r, θ)` on `grid`; the center is `f(0, 0)`.
    pub fn from_fn(grid: &PolarGrid, f: impl Fn(f64, f64) -> CMatrix) -> Self {
        let rings = (1..grid.radial_count)
            .map(|i| (0..grid.angular_count).map(|j| f(grid.radius(i), grid.angle(j))).collect())
            .collect();
        Self { center: f(0.0, 0.0), rings }
    }

    pub fn constant(grid: &PolarGrid, value: &CMatrix) -> Self {
        Self::from_fn(grid, |_, _| value.clone())
    }

    pub fn get(&self, radius: usize, angle: usize) -> &CMatrix {
        if radius == 0 {
            &self.center
        } else {
            &self.rings[radius - 1][angle]
        }
    }

    pub fn get_mut(&mut self, radius: usize, angle: usize) -> &mut CMatrix {
        if radius == 0 {
            &mut self.center
        } else {
            &mut self.rings[radius - 1][angle]
        }
    }

    fn check_shape(&self, grid: &PolarGrid, chart: &str) -> Result<()> {
        if self.rings.len() != grid.radial_count - 1
            || self.rings.iter().any(|r| r.len() != grid.angular_count)
        {
            return Err(Error::GridMismatch(format!(
                "{chart} samples do not match a {}x{} polar grid",
                grid.radial_count, grid.angular_count
            )));
        }
        Ok(())
    }

    /// All samples in grid order: center first, then ring by ring.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &CMatrix)> {
        std::iter::once((0, 0, &self.center)).chain(
            self.rings
                .iter()
                .enumerate()
                .flat_map(|(i, ring)| ring.iter().enumerate().map(move |(j, m)| (i + 1, j, m))),
        )
    }

    fn map(&self, f: impl Fn(usize, usize, &CMatrix) -> CMatrix) -> DiskSamples {
        DiskSamples {
            center: f(0, 0, &self.center),
            rings: self
                .rings
                .iter()
                .enumerate()
                .map(|(i, ring)| ring.iter().enumerate().map(|(j, m)| f(i + 1, j, m)).collect())
                .collect(),
        }
    }

    fn zip_map(&self, other: &DiskSamples, f: impl Fn(&CMatrix, &CMatrix) -> Result<CMatrix>) -> Result<DiskSamples> {
        let center = f(&self.center, &other.center)?;
        let rings = self
            .rings
            .iter()
            .zip(&other.rings)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| f(a, b)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(DiskSamples { center, rings })
    }
}

/// A pair of chart functions `(f1, f2)` over a [`Bundle2`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SectionRepr", into = "SectionRepr")]
pub struct Section {
    bundle: Bundle2,
    grid: PolarGrid,
    f1: DiskSamples,
    f2: DiskSamples,
}

impl Section {
    /// Checks that the grid matches the sewing loop and that both charts are
    /// sampled on it. Sample dimensions and equator compatibility are left to
    /// [`validate_section`].
    pub fn new(bundle: Bundle2, grid: PolarGrid, f1: DiskSamples, f2: DiskSamples) -> Result<Self> {
        if grid.angular_count != bundle.sewing.sample_count() {
            return Err(Error::GridMismatch(format!(
                "grid has {} angles but the sewing loop has {} samples",
                grid.angular_count,
                bundle.sewing.sample_count()
            )));
        }
        f1.check_shape(&grid, "chart 1")?;
        f2.check_shape(&grid, "chart 2")?;
        Ok(Self { bundle, grid, f1, f2 })
    }

    /// The identity section.
    pub fn identity(bundle: &Bundle2, grid: &PolarGrid) -> Result<Self> {
        let id = CMatrix::identity(bundle.n());
        Self::new(bundle.clone(), *grid, DiskSamples::constant(grid, &id), DiskSamples::constant(grid, &id))
    }

    pub fn bundle(&self) -> &Bundle2 {
        &self.bundle
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn f1(&self) -> &DiskSamples {
        &self.f1
    }

    pub fn f2(&self) -> &DiskSamples {
        &self.f2
    }

    pub fn chart(&self, chart: Chart) -> &DiskSamples {
        match chart {
            Chart::Upper => &self.f1,
            Chart::Lower => &self.f2,
        }
    }

    pub fn chart_mut(&mut self, chart: Chart) -> &mut DiskSamples {
        match chart {
            Chart::Upper => &mut self.f1,
            Chart::Lower => &mut self.f2,
        }
    }

    pub fn into_parts(self) -> (Bundle2, PolarGrid, DiskSamples, DiskSamples) {
        (self.bundle, self.grid, self.f1, self.f2)
    }

    fn check_compatible(&self, other: &Section) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("sections live on different grids".into()));
        }
        if self.bundle != other.bundle {
            return Err(Error::BaseMismatch("sections live on different bundles".into()));
        }
        Ok(())
    }

    fn combine(&self, other: &Section, f: impl Fn(&CMatrix, &CMatrix) -> Result<CMatrix> + Copy) -> Result<Section> {
        self.check_compatible(other)?;
        Ok(Section {
            bundle: self.bundle.clone(),
            grid: self.grid,
            f1: self.f1.zip_map(&other.f1, f)?,
            f2: self.f2.zip_map(&other.f2, f)?,
        })
    }

    /// Pointwise product in both charts.
    pub fn product(&self, other: &Section) -> Result<Section> {
        self.combine(other, |a, b| a.try_mul(b))
    }

    pub fn sum(&self, other: &Section) -> Result<Section> {
        self.combine(other, |a, b| a.try_add(b))
    }

    pub fn scale(&self, s: C64) -> Section {
        self.map_charts(|_, _, _, m| m.scale(s))
    }

    /// Pointwise adjoint in both charts.
    pub fn adjoint(&self) -> Section {
        self.map_charts(|_, _, _, m| m.adjoint())
    }

    /// Applies `f(chart, radius, angle, value)` to every sample, keeping the bundle.
    pub fn map_charts(&self, f: impl Fn(Chart, usize, usize, &CMatrix) -> CMatrix) -> Section {
        Section {
            bundle: self.bundle.clone(),
            grid: self.grid,
            f1: self.f1.map(|i, j, m| f(Chart::Upper, i, j, m)),
            f2: self.f2.map(|i, j, m| f(Chart::Lower, i, j, m)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SectionRepr {
    bundle: Bundle2,
    grid: PolarGrid,
    f1: DiskSamples,
    f2: DiskSamples,
}

impl TryFrom<SectionRepr> for Section {
    type Error = Error;
    fn try_from(r: SectionRepr) -> Result<Self> {
        Section::new(r.bundle, r.grid, r.f1, r.f2)
    }
}

impl From<Section> for SectionRepr {
    fn from(s: Section) -> Self {
        SectionRepr { bundle: s.bundle, grid: s.grid, f1: s.f1, f2: s.f2 }
    }
}

/// `f1(r, θ) = (1 - r) λI + r V(θ)* f2(1, θ) V(θ)`.
pub fn section_from_chart2(b: &Bundle2, g: &PolarGrid, f2: DiskSamples, center_scalar: C64) -> Result<Section> {
    section_from_chart2_with_center(b, g, f2, &CMatrix::scalar(b.n(), center_scalar))
}

/// Same radial interpolation with an arbitrary chart-1 center value.
pub fn section_from_chart2_with_center(
    b: &Bundle2,
    g: &PolarGrid,
    f2: DiskSamples,
    center: &CMatrix,
) -> Result<Section> {
    if g.angular_count != b.sewing.sample_count() {
        return Err(Error::GridMismatch(format!(
            "grid has {} angles but the sewing loop has {} samples",
            g.angular_count,
            b.sewing.sample_count()
        )));
    }
    f2.check_shape(g, "chart 2")?;
    if center.dim() != b.n() {
        return Err(Error::DimensionMismatch { expected: b.n(), found: center.dim() });
    }
    let eq = g.equator();
    let transported: Vec<CMatrix> = (0..g.angular_count)
        .map(|j| {
            let value = f2.get(eq, j);
            if value.dim() != b.n() {
                return Err(Error::DimensionMismatch { expected: b.n(), found: value.dim() });
            }
            Ok(value.conjugate_by(b.sewing.sample(j)))
        })
        .collect::<Result<_>>()?;
    let rings = (1..g.radial_count)
        .map(|i| {
            let r = g.radius(i);
            transported
                .iter()
                .map(|t| if i == eq { t.clone() } else { &center.scale_real(1.0 - r) + &t.scale_real(r) })
                .collect()
        })
        .collect();
    let f1 = DiskSamples { center: center.clone(), rings };
    Section::new(b.clone(), *g, f1, f2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MalformedSample {
    pub chart: Chart,
    pub radius: usize,
    pub angle: usize,
    pub found_dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquatorResidual {
    pub angle: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SectionReport {
    pub malformed: Vec<MalformedSample>,
    pub equator_violations: Vec<EquatorResidual>,
    pub max_equator_residual: f64,
}

impl SectionReport {
    pub fn is_empty(&self) -> bool {
        self.malformed.is_empty() && self.equator_violations.is_empty()
    }
}

/// Lists samples of the wrong dimension and equator residuals above `tol`,
/// ordered by grid index.
pub fn validate_section(s: &Section, tol: f64) -> SectionReport {
    let n = s.bundle.n();
    let mut report = SectionReport::default();
    for chart in [Chart::Upper, Chart::Lower] {
        for (radius, angle, m) in s.chart(chart).iter() {
            if m.dim() != n {
                report.malformed.push(MalformedSample { chart, radius, angle, found_dim: m.dim() });
            }
        }
    }
    let eq = s.grid.equator();
    for j in 0..s.grid.angular_count {
        let (a, b) = (s.f1.get(eq, j), s.f2.get(eq, j));
        if a.dim() != n || b.dim() != n {
            continue;
        }
        let residual = a.max_abs_diff(&b.conjugate_by(s.bundle.sewing.sample(j)));
        report.max_equator_residual = report.max_equator_residual.max(residual);
        if residual > tol {
            report.equator_violations.push(EquatorResidual { angle: j, residual });
        }
    }
    report
}

/// Samples of `a_0 + sum_k (b_k z^k + c_k conj(z)^k)` with random matrix
/// coefficients scaled by `1 / (k + 1)`, for building test data.
pub fn random_disk_samples(grid: &PolarGrid, n: usize, degree: usize, rng: &mut SplitMix64) -> DiskSamples {
    let coeffs: Vec<(CMatrix, CMatrix)> = (0..=degree)
        .map(|k| {
            let s = 1.0 / (k + 1) as f64;
            (rng.matrix(n).scale_real(s), rng.matrix(n).scale_real(s))
        })
        .collect();
    DiskSamples::from_fn(grid, |r, theta| {
        let z = C64::from_polar(r, theta);
        let mut acc = coeffs[0].0.clone();
        for (k, (b, cc)) in coeffs.iter().enumerate().skip(1) {
            let zk = z.powi(k as i32);
            acc = &acc + &(&b.scale(zk) + &cc.scale(zk.conj()));
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmatrix::c;
    use crate::loops::canonical_loop;

    fn bundle_with_index(n: usize, index: i64, m: usize) -> Bundle2 {
        Bundle2::new(UnitaryLoop::diagonal_power(n, index, m).unwrap()).unwrap()
    }

    #[test]
    fn classification_examples() {
        assert_eq!(Bundle2::canonical(3, 2, 256).unwrap().classify().unwrap(), 2);
        assert_eq!(bundle_with_index(3, 5, 256).classify().unwrap(), 2);
        assert_eq!(bundle_with_index(3, -1, 256).classify().unwrap(), 2);
        let constant = Bundle2::new(UnitaryLoop::constant(&CMatrix::identity(2), 64).unwrap()).unwrap();
        assert_eq!(constant.classify().unwrap(), 0);
    }

    #[test]
    fn isomorphism_examples() {
        assert!(bundles_isomorphic(&bundle_with_index(3, 1, 64), &bundle_with_index(3, 4, 64)).unwrap());
        assert!(!bundles_isomorphic(&bundle_with_index(2, 0, 64), &bundle_with_index(2, 1, 64)).unwrap());
        let b = bundle_with_index(4, 3, 64);
        assert!(bundles_isomorphic(&b, &b).unwrap());
        assert!(bundles_isomorphic(&b, &bundle_with_index(3, 3, 64)).is_err());
    }

    #[test]
    fn bundle_rejects_invalid_sewing() {
        let mut samples = canonical_loop(2, 1, 64).unwrap().samples().to_vec();
        samples[3] = samples[3].scale_real(2.0);
        assert!(Bundle2::new(UnitaryLoop::new(samples).unwrap()).is_err());
    }

    #[test]
    fn section_from_chart2_examples() {
        let g = PolarGrid::new(4, 64).unwrap();
        let b = Bundle2::canonical(2, 1, 64).unwrap();

        let id = section_from_chart2(&b, &g, DiskSamples::constant(&g, &CMatrix::identity(2)), c(1.0, 0.0)).unwrap();
        assert!(id.f1().iter().all(|(_, _, m)| m.max_abs_diff(&CMatrix::identity(2)) < 1e-15));

        let zero = section_from_chart2(&b, &g, DiskSamples::constant(&g, &CMatrix::zeros(2)), c(0.0, 0.0)).unwrap();
        assert!(zero.f1().iter().all(|(_, _, m)| m.max_abs() == 0.0));

        let p = CMatrix::diag_real(&[1.0, 0.0]);
        let s = section_from_chart2(&b, &g, DiskSamples::constant(&g, &p), c(0.5, 0.0)).unwrap();
        // θ = π/2 is angle index 16 of 64
        assert!(s.f1().get(g.equator(), 16).max_abs_diff(&p) < 1e-15);
        assert!(validate_section(&s, EQUATOR_TOL).is_empty());
    }

    #[test]
    fn section_grid_mismatch() {
        let g = PolarGrid::new(3, 32).unwrap();
        let b = Bundle2::canonical(2, 1, 64).unwrap();
        let f2 = DiskSamples::constant(&g, &CMatrix::identity(2));
        assert!(matches!(section_from_chart2(&b, &g, f2, c(1.0, 0.0)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn validation_flags_perturbed_equator() {
        let g = PolarGrid::new(3, 32).unwrap();
        let b = Bundle2::canonical(3, 2, 32).unwrap();
        let mut rng = SplitMix64::new(11);
        let s = section_from_chart2(&b, &g, random_disk_samples(&g, 3, 2, &mut rng), c(0.3, 0.0)).unwrap();
        assert!(validate_section(&s, EQUATOR_TOL).is_empty());

        let (b, g, mut f1, f2) = s.into_parts();
        let bumped = f1.get(g.equator(), 7) + &CMatrix::unit(3, 0, 2).scale_real(10.0 * EQUATOR_TOL);
        *f1.get_mut(g.equator(), 7) = bumped;
        let report = validate_section(&Section::new(b, g, f1, f2).unwrap(), EQUATOR_TOL);
        assert_eq!(report.equator_violations.len(), 1);
        assert_eq!(report.equator_violations[0].angle, 7);
    }

    #[test]
    fn identity_section_is_valid() {
        for k in 0..3 {
            let b = Bundle2::canonical(3, k, 16).unwrap();
            let s = Section::identity(&b, &PolarGrid::new(2, 16).unwrap()).unwrap();
            assert!(validate_section(&s, EQUATOR_TOL).is_empty());
        }
    }

    #[test]
    fn malformed_samples_are_reported() {
        let g = PolarGrid::new(2, 16).unwrap();
        let b = Bundle2::canonical(2, 0, 16).unwrap();
        let mut s = Section::identity(&b, &g).unwrap();
        *s.chart_mut(Chart::Lower).get_mut(0, 0) = CMatrix::identity(3);
        let report = validate_section(&s, EQUATOR_TOL);
        assert_eq!(report.malformed.len(), 1);
        assert_eq!(report.malformed[0].chart, Chart::Lower);
    }

    #[test]
    fn bundle_json_accepts_shorthand() {
        let b: Bundle2 = serde_json::from_str(r#"{"n":3,"sewing":"canonical:3,2,64"}"#).unwrap();
        assert_eq!(b, Bundle2::canonical(3, 2, 64).unwrap());
        let round: Bundle2 = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(round, b);
        assert!(serde_json::from_str::<Bundle2>(r#"{"n":2,"sewing":"canonical:3,2,64"}"#).is_err());
    }

    #[test]
    fn section_json_round_trip() {
        let g = PolarGrid::new(2, 16).unwrap();
        let s = Section::identity(&Bundle2::canonical(2, 1, 16).unwrap(), &g).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: Section = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
