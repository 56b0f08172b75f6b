//! Fixed-point matrix-function algebras.
//!
//! An algebra here is a base (two-chart sphere, disk or interval), an
//! ambient matrix size `n` and a list of boundary conditions. Each condition
//! pins the value at one point to the block pattern
//! `diag(1_{d_1} ⊗ a_1, .., 1_{d_k} ⊗ a_k)`; with all `d_i = 1` this is the
//! block-diagonal algebra `M_{m_1} ⊕ .. ⊕ M_{m_k}`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bundle::{validate_section, Chart, PolarGrid, Section, SectionReport};
use crate::cmatrix::{BlockStructure, CMatrix};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Where a boundary condition sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Location {
    /// A node of a sphere chart grid.
    Grid { chart: Chart, radius: usize, angle: usize },
    /// An interval endpoint, `t` = 0 or 1.
    Endpoint { t: u8 },
    /// The center of a disk.
    Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub location: Location,
    #[serde(flatten)]
    pub structure: BlockStructure,
}

impl BoundaryCondition {
    pub fn new(location: Location, structure: BlockStructure) -> Self {
        Self { location, structure }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    Sphere,
    Disk { dim: usize },
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlgebraRepr", into = "AlgebraRepr")]
pub struct FixedPointAlgebra {
    base: Base,
    n: usize,
    bundle_class: usize,
    conditions: Vec<BoundaryCondition>,
}

/// Normalized fixed-point positions for sphere algebras: the chart-2 pole
/// and two interior chart-2 nodes. Needs a grid with at least 3 radii and
/// 9 angles.
pub const SPHERE_FIXED_POINTS: [Location; 3] = [
    Location::Grid { chart: Chart::Lower, radius: 0, angle: 0 },
    Location::Grid { chart: Chart::Lower, radius: 1, angle: 0 },
    Location::Grid { chart: Chart::Lower, radius: 1, angle: 8 },
];

/// The chart-1 center, where `B_{n,p}(m)` places its fixed point.
pub const UPPER_CENTER: Location = Location::Grid { chart: Chart::Upper, radius: 0, angle: 0 };

impl FixedPointAlgebra {
    pub fn new(base: Base, n: usize, bundle_class: usize, conditions: Vec<BoundaryCondition>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("ambient dimension must be positive".into()));
        }
        let mut seen = HashSet::new();
        for (i, cond) in conditions.iter().enumerate() {
            cond.structure.check_dim(n).map_err(|_| {
                Error::Parameter(format!(
                    "condition {i}: block data sums to {}, not n = {n}",
                    cond.structure.total_dim()
                ))
            })?;
            if !seen.insert(cond.location) {
                return Err(Error::Parameter(format!("condition {i}: duplicate location {:?}", cond.location)));
            }
            let fits = matches!(
                (base, cond.location),
                (Base::Sphere, Location::Grid { .. })
                    | (Base::Interval, Location::Endpoint { t: 0 | 1 })
                    | (Base::Disk { .. }, Location::Origin)
            );
            if !fits {
                return Err(Error::BaseMismatch(format!(
                    "condition {i}: location {:?} does not belong to a {base:?} base",
                    cond.location
                )));
            }
        }
        match base {
            Base::Sphere if bundle_class >= n => {
                return Err(Error::Parameter(format!("bundle class {bundle_class} must be below n = {n}")));
            }
            Base::Disk { .. } if conditions.len() != 1 => {
                return Err(Error::Parameter("a disk algebra has exactly one condition, at the origin".into()));
            }
            Base::Disk { dim: 0 } => return Err(Error::Parameter("disk dimension must be positive".into())),
            Base::Disk { .. } | Base::Interval if bundle_class != 0 => {
                return Err(Error::Parameter("only sphere algebras carry a bundle class".into()));
            }
            _ => {}
        }
        Ok(Self { base, n, bundle_class, conditions })
    }

    /// `B_{n,p}(m_1, .., m_k)`: sections of `B_{n,p}` block-diagonal at the
    /// chart-1 center.
    pub fn over_bundle(n: usize, p: usize, blocks: Vec<usize>) -> Result<Self> {
        let cond = BoundaryCondition::new(UPPER_CENTER, BlockStructure::simple(blocks)?);
        Self::new(Base::Sphere, n, p, vec![cond])
    }

    /// `D^l(m_1, .., m_k)`.
    pub fn disk(l: usize, blocks: Vec<usize>) -> Result<Self> {
        let structure = BlockStructure::simple(blocks)?;
        let n = structure.total_dim();
        Self::new(Base::Disk { dim: l }, n, 0, vec![BoundaryCondition::new(Location::Origin, structure)])
    }

    /// Sphere algebra over the trivial bundle with conditions at the
    /// normalized fixed points, in order.
    fn sphere_at_fixed_points(n: usize, blocks: &[&[usize]]) -> Result<Self> {
        let conditions = blocks
            .iter()
            .zip(SPHERE_FIXED_POINTS)
            .map(|(b, loc)| Ok(BoundaryCondition::new(loc, BlockStructure::simple(b.to_vec())?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(Base::Sphere, n, 0, conditions)
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bundle_class(&self) -> usize {
        self.bundle_class
    }

    pub fn conditions(&self) -> &[BoundaryCondition] {
        &self.conditions
    }
}

#[derive(Serialize, Deserialize)]
struct AlgebraRepr {
    base: String,
    n: usize,
    #[serde(default)]
    bundle_class: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disk_dim: Option<usize>,
    conditions: Vec<BoundaryCondition>,
}

impl TryFrom<AlgebraRepr> for FixedPointAlgebra {
    type Error = Error;
    fn try_from(r: AlgebraRepr) -> Result<Self> {
        let base = match r.base.as_str() {
            "sphere" => Base::Sphere,
            "interval" => Base::Interval,
            "disk" => Base::Disk { dim: r.disk_dim.unwrap_or(2) },
            other => return Err(Error::UnknownName(other.to_string())),
        };
        FixedPointAlgebra::new(base, r.n, r.bundle_class, r.conditions)
    }
}

impl From<FixedPointAlgebra> for AlgebraRepr {
    fn from(a: FixedPointAlgebra) -> Self {
        let (base, disk_dim) = match a.base {
            Base::Sphere => ("sphere", None),
            Base::Interval => ("interval", None),
            Base::Disk { dim } => ("disk", Some(dim)),
        };
        AlgebraRepr {
            base: base.to_string(),
            n: a.n,
            bundle_class: a.bundle_class,
            disk_dim,
            conditions: a.conditions,
        }
    }
}

/// Samples `f(t_j)`, `t_j = j / (K - 1)`, of a function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalFunction {
    pub samples: Vec<CMatrix>,
}

impl IntervalFunction {
    pub fn from_fn(count: usize, f: impl Fn(f64) -> CMatrix) -> Result<Self> {
        if count < 2 {
            return Err(Error::Parameter("an interval function needs at least 2 samples".into()));
        }
        Ok(Self { samples: (0..count).map(|j| f(j as f64 / (count - 1) as f64)).collect() })
    }
}

/// A disk function seen through radial approach sequences to the origin.
/// Each ray lists samples at increasing radius, excluding the center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskFunction {
    pub center: CMatrix,
    pub rays: Vec<Vec<CMatrix>>,
}

/// Anything `check_membership` can test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampledFunction {
    Section(Section),
    Interval(IntervalFunction),
    Disk(DiskFunction),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub index: usize,
    pub location: Location,
    pub residual: f64,
    pub passed: bool,
    /// Disk bases: rays whose approach to the origin violates the limit pattern.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failing_rays: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub section: Option<SectionReport>,
    pub conditions: Vec<ConditionReport>,
    pub member: bool,
}

/// Checks section validity (sphere base) and every boundary condition.
pub fn check_membership(alg: &FixedPointAlgebra, f: &SampledFunction, tol: f64) -> Result<MembershipReport> {
    let (section, conditions) = match (alg.base, f) {
        (Base::Sphere, SampledFunction::Section(s)) => {
            check_sphere_base(alg, s)?;
            let report = validate_section(s, tol);
            let conditions = alg
                .conditions
                .iter()
                .enumerate()
                .map(|(index, cond)| {
                    let value = sphere_value(s, cond.location)?;
                    Ok(condition_report(index, cond, cond.structure.pattern_residual(value)?, tol))
                })
                .collect::<Result<Vec<_>>>()?;
            (Some(report), conditions)
        }
        (Base::Interval, SampledFunction::Interval(g)) => {
            if g.samples.len() < 2 {
                return Err(Error::Parameter("an interval function needs at least 2 samples".into()));
            }
            check_dims(alg.n, g.samples.iter())?;
            let conditions = alg
                .conditions
                .iter()
                .enumerate()
                .map(|(index, cond)| {
                    let value = match cond.location {
                        Location::Endpoint { t: 0 } => &g.samples[0],
                        _ => g.samples.last().expect("non-empty"),
                    };
                    Ok(condition_report(index, cond, cond.structure.pattern_residual(value)?, tol))
                })
                .collect::<Result<Vec<_>>>()?;
            (None, conditions)
        }
        (Base::Disk { .. }, SampledFunction::Disk(d)) => {
            check_dims(alg.n, std::iter::once(&d.center).chain(d.rays.iter().flatten()))?;
            let cond = &alg.conditions[0];
            let mut report = condition_report(0, cond, cond.structure.pattern_residual(&d.center)?, tol);
            for (r, ray) in d.rays.iter().enumerate() {
                let approach: Vec<CMatrix> = ray.iter().rev().chain(std::iter::once(&d.center)).cloned().collect();
                if let LimitVerdict::Violation(_) = check_boundary_limit(&approach, &cond.structure, tol)? {
                    report.failing_rays.push(r);
                }
            }
            report.passed &= report.failing_rays.is_empty();
            (None, vec![report])
        }
        (base, _) => {
            return Err(Error::BaseMismatch(format!("function samples do not live over a {base:?} base")));
        }
    };
    let member = section.as_ref().is_none_or(SectionReport::is_empty) && conditions.iter().all(|c| c.passed);
    Ok(MembershipReport { section, conditions, member })
}

fn condition_report(index: usize, cond: &BoundaryCondition, residual: f64, tol: f64) -> ConditionReport {
    ConditionReport { index, location: cond.location, residual, passed: residual <= tol, failing_rays: Vec::new() }
}

fn check_dims<'a>(n: usize, mut it: impl Iterator<Item = &'a CMatrix>) -> Result<()> {
    match it.find(|m| m.dim() != n) {
        Some(m) => Err(Error::DimensionMismatch { expected: n, found: m.dim() }),
        None => Ok(()),
    }
}

fn check_sphere_base(alg: &FixedPointAlgebra, s: &Section) -> Result<()> {
    if s.bundle().n() != alg.n {
        return Err(Error::DimensionMismatch { expected: alg.n, found: s.bundle().n() });
    }
    let class = s.bundle().classify()?;
    if class != alg.bundle_class {
        return Err(Error::BaseMismatch(format!(
            "section lives on a bundle of class {class}, algebra expects {}",
            alg.bundle_class
        )));
    }
    Ok(())
}

/// Value of a section at a non-equatorial grid node.
fn sphere_value(s: &Section, loc: Location) -> Result<&CMatrix> {
    let Location::Grid { chart, radius, angle } = loc else {
        unreachable!("sphere algebras only hold grid locations");
    };
    let g = s.grid();
    if radius >= g.equator() {
        return Err(Error::GridMismatch(format!(
            "fixed point at radius index {radius} is not inside the chart (equator is {})",
            g.equator()
        )));
    }
    if angle >= g.angular_count() {
        return Err(Error::GridMismatch(format!("angle index {angle} outside a {}-angle grid", g.angular_count())));
    }
    Ok(s.chart(chart).get(radius, angle))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LimitViolation {
    /// The last sample is farther than `tol` from the fitted pattern.
    FinalResidual { residual: f64 },
    /// The distance to the fitted pattern grew at `index`.
    NotDecreasing { index: usize, residual: f64, previous: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LimitVerdict {
    /// The extracted blocks `(a_1, .., a_r)` and the final residual.
    Holds { blocks: Vec<CMatrix>, residual: f64 },
    Violation(LimitViolation),
}

/// Relative growth allowed between successive residuals.
pub const CAUCHY_SLACK: f64 = 1.1;

/// Fits the last sample of an approach sequence to the pattern
/// `diag(1_{d_1} ⊗ a_1, .., 1_{d_r} ⊗ a_r)` and checks that the sequence
/// closes in on that pattern.
///
/// The fitted blocks are averages of the diagonal copies in the last sample.
/// With `r_j` the max-entry distance of sample `j` to the fitted pattern,
/// the check requires `r_last <= tol` and `r_j <= max(1.1 r_{j-1}, tol)`.
pub fn check_boundary_limit(samples: &[CMatrix], structure: &BlockStructure, tol: f64) -> Result<LimitVerdict> {
    if samples.len() < 3 {
        return Err(Error::Parameter(format!("need at least 3 samples, got {}", samples.len())));
    }
    let n = samples[0].dim();
    check_dims(n, samples.iter())?;
    let last = samples.last().expect("non-empty");
    let blocks = structure.extract_pattern(last)?;
    let fitted = structure.assemble(&blocks)?;
    let residuals: Vec<f64> = samples.iter().map(|s| s.max_abs_diff(&fitted)).collect();
    let residual = *residuals.last().expect("non-empty");
    if residual > tol {
        return Ok(LimitVerdict::Violation(LimitViolation::FinalResidual { residual }));
    }
    for (j, w) in residuals.windows(2).enumerate() {
        if w[1] > (CAUCHY_SLACK * w[0]).max(tol) {
            return Ok(LimitVerdict::Violation(LimitViolation::NotDecreasing {
                index: j + 1,
                residual: w[1],
                previous: w[0],
            }));
        }
    }
    Ok(LimitVerdict::Holds { blocks, residual })
}

/// Named algebras with a known matrix-function model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CanonicalName {
    D4,
    E6,
    E7,
    E8,
    Pab,
    P2,
}

impl CanonicalName {
    pub const ALL: [CanonicalName; 6] = [Self::D4, Self::E6, Self::E7, Self::E8, Self::Pab, Self::P2];
}

impl FromStr for CanonicalName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D4" => Ok(Self::D4),
            "E6" => Ok(Self::E6),
            "E7" => Ok(Self::E7),
            "E8" => Ok(Self::E8),
            "P_ab" | "Pab" => Ok(Self::Pab),
            "P2" => Ok(Self::P2),
            _ => Err(Error::UnknownName(s.to_string())),
        }
    }
}

impl fmt::Display for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::D4 => "D4",
            Self::E6 => "E6",
            Self::E7 => "E7",
            Self::E8 => "E8",
            Self::Pab => "P_ab",
            Self::P2 => "P2",
        };
        f.write_str(s)
    }
}

/// Matrix-function model of a named enveloping algebra.
///
/// | name | n | conditions |
/// |------|---|------------|
/// | D4   | 2 | (1,1), (1,1), (1,1) |
/// | E6   | 3 | (2,1), (1,1,1), (1,1,1) |
/// | E7   | 4 | (2,2), (2,1,1), (1,1,1,1) |
/// | E8   | 6 | (3,3), (2,2,1,1), (1,1,1,1,1,1) |
/// | P_ab | 2 | (1,1), (1,1) |
/// | P2   | 2 | interval, diagonal at both ends |
///
/// Sphere models use the trivial bundle and [`SPHERE_FIXED_POINTS`].
pub fn canonical_form(name: CanonicalName) -> FixedPointAlgebra {
    let alg = match name {
        CanonicalName::D4 => FixedPointAlgebra::sphere_at_fixed_points(2, &[&[1, 1], &[1, 1], &[1, 1]]),
        CanonicalName::E6 => FixedPointAlgebra::sphere_at_fixed_points(3, &[&[2, 1], &[1, 1, 1], &[1, 1, 1]]),
        CanonicalName::E7 => {
            FixedPointAlgebra::sphere_at_fixed_points(4, &[&[2, 2], &[2, 1, 1], &[1, 1, 1, 1]])
        }
        CanonicalName::E8 => {
            FixedPointAlgebra::sphere_at_fixed_points(6, &[&[3, 3], &[2, 2, 1, 1], &[1, 1, 1, 1, 1, 1]])
        }
        CanonicalName::Pab => FixedPointAlgebra::sphere_at_fixed_points(2, &[&[1, 1], &[1, 1]]),
        CanonicalName::P2 => {
            let diag = BlockStructure::simple(vec![1, 1]).expect("valid blocks");
            FixedPointAlgebra::new(
                Base::Interval,
                2,
                0,
                vec![
                    BoundaryCondition::new(Location::Endpoint { t: 0 }, diag.clone()),
                    BoundaryCondition::new(Location::Endpoint { t: 1 }, diag),
                ],
            )
        }
    };
    alg.expect("canonical block data is consistent")
}

/// A random member section of a sphere algebra on `grid`.
///
/// Starts from a random polynomial section and, around each fixed point `x`,
/// subtracts a tent `w(z) (f(x) - P(f(x)))`, where `P` is the pattern fit at
/// `x` and `w` is 1 at `x` and vanishes before the equator and before any
/// other fixed point. The result stays continuous in both charts.
pub fn random_member(alg: &FixedPointAlgebra, grid: &PolarGrid, degree: usize, rng: &mut SplitMix64) -> Result<Section> {
    if alg.base != Base::Sphere {
        return Err(Error::BaseMismatch("random members are built for sphere algebras only".into()));
    }
    let m = grid.angular_count();
    let bundle = crate::bundle::Bundle2::canonical(alg.n, alg.bundle_class, m)?;
    let f2 = crate::bundle::random_disk_samples(grid, alg.n, degree, rng);
    let lambda = rng.complex();
    let center = &CMatrix::scalar(alg.n, lambda) + &rng.matrix(alg.n).scale_real(0.5);
    let mut section = crate::bundle::section_from_chart2_with_center(&bundle, grid, f2, &center)?;

    let points: Vec<(Chart, num_complex::Complex64)> = alg
        .conditions
        .iter()
        .map(|c| match c.location {
            Location::Grid { chart, radius, angle } => {
                (chart, num_complex::Complex64::from_polar(grid.radius(radius), grid.angle(angle)))
            }
            _ => unreachable!("sphere algebras only hold grid locations"),
        })
        .collect();

    for (k, cond) in alg.conditions.iter().enumerate() {
        let value = sphere_value(&section, cond.location)?.clone();
        let fitted = cond.structure.assemble(&cond.structure.extract_pattern(&value)?)?;
        let defect = &value - &fitted;
        let (chart, z0) = points[k];
        let mut reach = 1.0 - z0.norm();
        for (l, &(other_chart, z1)) in points.iter().enumerate() {
            if l != k && other_chart == chart {
                reach = reach.min((z1 - z0).norm());
            }
        }
        let reach = 0.5 * reach;
        let Location::Grid { radius: r0, angle: a0, .. } = cond.location else { unreachable!() };
        let disk = section.chart_mut(chart);
        let coords: Vec<(usize, usize)> = disk.iter().map(|(i, j, _)| (i, j)).collect();
        for (i, j) in coords {
            if (i, j) == (r0, a0) || (i == 0 && r0 == 0) {
                *disk.get_mut(i, j) = fitted.clone();
                continue;
            }
            let z = num_complex::Complex64::from_polar(grid.radius(i), grid.angle(j));
            let w = 1.0 - (z - z0).norm() / reach;
            if w > 0.0 {
                let v = disk.get(i, j) - &defect.scale_real(w);
                *disk.get_mut(i, j) = v;
            }
        }
    }
    Ok(section)
}
