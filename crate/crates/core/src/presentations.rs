//! Finitely presented *-algebras and checks of finite-dimensional
//! representations against them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cmatrix::{commutant_dimension, hermitian_eigenvalues, CMatrix};
use crate::error::{Error, Result};

/// `coefficient · g_1 g_2 .. g_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coefficient: f64,
    pub word: Vec<String>,
}

impl Term {
    pub fn new(coefficient: f64, word: &[&str]) -> Self {
        Self { coefficient, word: word.iter().map(|s| s.to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Relation {
    /// `g^2 = g = g*`.
    HermitianProjection { generator: String },
    /// `Σ terms = identity_coefficient · e`.
    WeightedSum { terms: Vec<Term>, identity_coefficient: f64 },
    /// `g h = 0`.
    Orthogonality { left: String, right: String },
    /// `g = g*`.
    Selfadjoint { generator: String },
    /// `[g, h] = 0`.
    Commutation { left: String, right: String },
    /// `g >= lower_bound · e`.
    Positivity { generator: String, lower_bound: f64 },
    /// `g + h = e`.
    SumToIdentity { left: String, right: String },
}

impl Relation {
    fn generators(&self) -> Vec<&str> {
        match self {
            Self::HermitianProjection { generator } | Self::Selfadjoint { generator } | Self::Positivity { generator, .. } => {
                vec![generator]
            }
            Self::WeightedSum { terms, .. } => terms.iter().flat_map(|t| t.word.iter().map(String::as_str)).collect(),
            Self::Orthogonality { left, right } | Self::Commutation { left, right } | Self::SumToIdentity { left, right } => {
                vec![left, right]
            }
        }
    }

    fn scalars(&self) -> Vec<f64> {
        match self {
            Self::WeightedSum { terms, identity_coefficient } => {
                terms.iter().map(|t| t.coefficient).chain([*identity_coefficient]).collect()
            }
            Self::Positivity { lower_bound, .. } => vec![*lower_bound],
            _ => Vec::new(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::HermitianProjection { .. } => "hermitian_projection",
            Self::WeightedSum { .. } => "weighted_sum",
            Self::Orthogonality { .. } => "orthogonality",
            Self::Selfadjoint { .. } => "selfadjoint",
            Self::Commutation { .. } => "commutation",
            Self::Positivity { .. } => "positivity",
            Self::SumToIdentity { .. } => "sum_to_identity",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::HermitianProjection { generator: g } => write!(f, "{g}^2 = {g} = {g}*"),
            Self::WeightedSum { terms, identity_coefficient } => {
                for (i, t) in terms.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" + ")?;
                    }
                    if t.coefficient != 1.0 {
                        write!(f, "{}·", t.coefficient)?;
                    }
                    f.write_str(&t.word.join(""))?;
                }
                write!(f, " = {identity_coefficient}e")
            }
            Self::Orthogonality { left, right } => write!(f, "{left}{right} = 0"),
            Self::Selfadjoint { generator: g } => write!(f, "{g} = {g}*"),
            Self::Commutation { left, right } => write!(f, "[{left}, {right}] = 0"),
            Self::Positivity { generator, lower_bound } => write!(f, "{generator} >= {lower_bound}e"),
            Self::SumToIdentity { left, right } => write!(f, "{left} + {right} = e"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PresentationRepr", into = "PresentationRepr")]
pub struct StarPresentation {
    generators: Vec<String>,
    relations: Vec<Relation>,
}

#[derive(Serialize, Deserialize)]
struct PresentationRepr {
    generators: Vec<String>,
    relations: Vec<Relation>,
}

impl StarPresentation {
    pub fn new(generators: Vec<String>, relations: Vec<Relation>) -> Result<Self> {
        let mut declared = BTreeSet::new();
        for g in &generators {
            if !declared.insert(g.as_str()) {
                return Err(Error::Malformed(format!("generator {g} declared twice")));
            }
        }
        for rel in &relations {
            if let Some(g) = rel.generators().into_iter().find(|g| !declared.contains(g)) {
                return Err(Error::UnknownGenerator(g.to_string()));
            }
            if rel.scalars().iter().any(|x| !x.is_finite()) {
                return Err(Error::Malformed(format!("non-finite weight in {rel}")));
            }
        }
        Ok(Self { generators, relations })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }
}

impl TryFrom<PresentationRepr> for StarPresentation {
    type Error = Error;
    fn try_from(r: PresentationRepr) -> Result<Self> {
        StarPresentation::new(r.generators, r.relations)
    }
}

impl From<StarPresentation> for PresentationRepr {
    fn from(p: StarPresentation) -> Self {
        PresentationRepr { generators: p.generators, relations: p.relations }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepresentationRepr", into = "RepresentationRepr")]
pub struct Representation {
    dim: usize,
    assignment: BTreeMap<String, CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct RepresentationRepr {
    dim: usize,
    assignment: BTreeMap<String, CMatrix>,
}

impl Representation {
    pub fn new(dim: usize, assignment: BTreeMap<String, CMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("representation dimension must be positive".into()));
        }
        if let Some(m) = assignment.values().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: m.dim() });
        }
        Ok(Self { dim, assignment })
    }

    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (&'static str, CMatrix)>) -> Result<Self> {
        Self::new(dim, pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn assignment(&self) -> &BTreeMap<String, CMatrix> {
        &self.assignment
    }

    pub fn get(&self, name: &str) -> Result<&CMatrix> {
        self.assignment.get(name).ok_or_else(|| Error::MissingGenerator(name.to_string()))
    }

    /// `u* π(g) u` for every generator.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: u.dim() });
        }
        Ok(Self { dim: self.dim, assignment: self.assignment.iter().map(|(k, v)| (k.clone(), v.conjugate_by(u))).collect() })
    }
}

impl TryFrom<RepresentationRepr> for Representation {
    type Error = Error;
    fn try_from(r: RepresentationRepr) -> Result<Self> {
        Representation::new(r.dim, r.assignment)
    }
}

impl From<Representation> for RepresentationRepr {
    fn from(r: Representation) -> Self {
        RepresentationRepr { dim: r.dim, assignment: r.assignment }
    }
}

/// Built-in presentations, with their parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    D4,
    E6,
    E7,
    E8,
    Pab { alpha: f64, beta: f64 },
    PbarEps { eps: f64 },
    P2,
}

impl FromStr for Builtin {
    type Err = Error;
    /// `D4`, `E6`, `E7`, `E8`, `P2`, `P_ab(α,β)`, `Pbar_eps(ε)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let params = |prefix: &str| -> Option<Result<Vec<f64>>> {
            let inner = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            Some(
                inner
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Malformed(format!("{x:?}: {e}"))))
                    .collect(),
            )
        };
        match s {
            "D4" => return Ok(Self::D4),
            "E6" => return Ok(Self::E6),
            "E7" => return Ok(Self::E7),
            "E8" => return Ok(Self::E8),
            "P2" => return Ok(Self::P2),
            _ => {}
        }
        if let Some(p) = params("P_ab") {
            return match p?.as_slice() {
                &[alpha, beta] => Ok(Self::Pab { alpha, beta }),
                _ => Err(Error::Malformed("P_ab takes two parameters".into())),
            };
        }
        if let Some(p) = params("Pbar_eps") {
            return match p?.as_slice() {
                &[eps] => Ok(Self::PbarEps { eps }),
                _ => Err(Error::Malformed("Pbar_eps takes one parameter".into())),
            };
        }
        Err(Error::UnknownName(s.to_string()))
    }
}

fn names(prefix: &str, count: usize) -> Vec<String> {
    (1..=count).map(|i| format!("{prefix}{i}")).collect()
}

fn projections(gens: &[String]) -> impl Iterator<Item = Relation> + '_ {
    gens.iter().map(|g| Relation::HermitianProjection { generator: g.clone() })
}

/// `g_j g_k = 0` for `j < k`; for projections this also gives `g_k g_j = 0`.
fn orthogonal_family(gens: &[String]) -> Vec<Relation> {
    let mut out = Vec::new();
    for (j, a) in gens.iter().enumerate() {
        for b in &gens[j + 1..] {
            out.push(Relation::Orthogonality { left: a.clone(), right: b.clone() });
        }
    }
    out
}

fn weighted(gens: &[String], weights: &[f64], identity_coefficient: f64) -> Relation {
    Relation::WeightedSum {
        terms: gens.iter().zip(weights).map(|(g, &w)| Term { coefficient: w, word: vec![g.clone()] }).collect(),
        identity_coefficient,
    }
}

/// Generator families `(prefix, count)`, with `count = 0` meaning a single
/// unindexed generator named `prefix`. With `orthogonal`, generators within
/// a family are pairwise orthogonal.
fn dynkin(families: &[(&str, usize)], weights: &[f64], identity_coefficient: f64, orthogonal: bool) -> StarPresentation {
    let groups: Vec<Vec<String>> = families
        .iter()
        .map(|&(p, k)| if k == 0 { vec![p.to_string()] } else { names(p, k) })
        .collect();
    let gens: Vec<String> = groups.concat();
    let mut rels = vec![weighted(&gens, weights, identity_coefficient)];
    rels.extend(projections(&gens));
    if orthogonal {
        for g in &groups {
            rels.extend(orthogonal_family(g));
        }
    }
    StarPresentation::new(gens, rels).expect("built-in presentations are consistent")
}

pub fn builtin_presentation(name: Builtin) -> Result<StarPresentation> {
    Ok(match name {
        Builtin::D4 => dynkin(&[("p", 4)], &[1.0; 4], 2.0, false),
        Builtin::E6 => dynkin(&[("p", 2), ("q", 2), ("r", 2)], &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0], 3.0, true),
        Builtin::E7 => dynkin(&[("p", 3), ("q", 3), ("r", 0)], &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 2.0], 4.0, true),
        Builtin::E8 => dynkin(&[("p", 2), ("q", 5), ("r", 0)], &[2.0, 4.0, 1.0, 2.0, 3.0, 4.0, 5.0, 3.0], 6.0, true),
        Builtin::Pab { alpha, beta } => {
            if !(alpha > 0.0 && beta > 0.0 && (alpha + beta - 1.0).abs() <= 1e-12) {
                return Err(Error::Parameter(format!("P_ab needs α, β > 0 with α + β = 1, got ({alpha}, {beta})")));
            }
            let gens = names("p", 4);
            let mut rels = vec![weighted(&gens, &[alpha, alpha, beta, beta], 1.0)];
            rels.extend(projections(&gens));
            StarPresentation::new(gens, rels)?
        }
        Builtin::PbarEps { eps } => {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::Parameter(format!("Pbar_eps needs 0 < ε < 1/2, got {eps}")));
            }
            let ps = names("p", 4);
            let (a, b) = ("alpha".to_string(), "beta".to_string());
            let term = |c: &String, p: &String| Term { coefficient: 1.0, word: vec![c.clone(), p.clone()] };
            let mut rels = vec![Relation::WeightedSum {
                terms: vec![term(&a, &ps[0]), term(&a, &ps[1]), term(&b, &ps[2]), term(&b, &ps[3])],
                identity_coefficient: 1.0,
            }];
            rels.extend(projections(&ps));
            rels.push(Relation::Selfadjoint { generator: a.clone() });
            rels.push(Relation::Selfadjoint { generator: b.clone() });
            for c in [&a, &b] {
                for p in &ps {
                    rels.push(Relation::Commutation { left: c.clone(), right: p.clone() });
                }
            }
            rels.push(Relation::Commutation { left: a.clone(), right: b.clone() });
            rels.push(Relation::Positivity { generator: a.clone(), lower_bound: eps });
            rels.push(Relation::Positivity { generator: b.clone(), lower_bound: eps });
            rels.push(Relation::SumToIdentity { left: a.clone(), right: b.clone() });
            StarPresentation::new([ps, vec![a, b]].concat(), rels)?
        }
        Builtin::P2 => {
            let gens = names("p", 2);
            let rels = projections(&gens).collect();
            StarPresentation::new(gens, rels)?
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationResidual {
    pub index: usize,
    pub kind: &'static str,
    pub relation: String,
    pub residual: f64,
    pub passed: bool,
    /// Positivity only: `max |g - g*|`, reported but not part of the verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selfadjoint_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub relations: Vec<RelationResidual>,
    pub passed: bool,
    pub max_residual: f64,
}

/// Max-entry residual of every relation under the assignment.
///
/// Positivity is measured on the Hermitian part `(g + g*)/2`: the residual is
/// `max(0, ε - λ_min)`, so it passes iff `λ_min >= ε - tol`.
pub fn verify_representation(p: &StarPresentation, r: &Representation, tol: f64) -> Result<RepresentationReport> {
    for g in &p.generators {
        r.get(g)?;
    }
    if let Some(extra) = r.assignment.keys().find(|k| !p.generators.contains(k)) {
        return Err(Error::UnknownGenerator(extra.clone()));
    }
    let n = r.dim;
    let id = CMatrix::identity(n);
    let get = |g: &str| r.get(g).expect("checked above");
    let word = |w: &[String]| w.iter().fold(id.clone(), |acc, g| &acc * get(g));

    let relations: Vec<RelationResidual> = p
        .relations
        .iter()
        .enumerate()
        .map(|(index, rel)| {
            let mut selfadjoint_residual = None;
            let residual = match rel {
                Relation::HermitianProjection { generator } => get(generator).projection_residual(),
                Relation::WeightedSum { terms, identity_coefficient } => {
                    let lhs = terms.iter().fold(CMatrix::zeros(n), |acc, t| &acc + &word(&t.word).scale_real(t.coefficient));
                    lhs.max_abs_diff(&id.scale_real(*identity_coefficient))
                }
                Relation::Orthogonality { left, right } => (get(left) * get(right)).max_abs(),
                Relation::Selfadjoint { generator } => get(generator).max_abs_diff(&get(generator).adjoint()),
                Relation::Commutation { left, right } => get(left).commutator(get(right)).max_abs(),
                Relation::Positivity { generator, lower_bound } => {
                    let g = get(generator);
                    selfadjoint_residual = Some(g.max_abs_diff(&g.adjoint()));
                    let lowest = hermitian_eigenvalues(g).first().copied().unwrap_or(f64::INFINITY);
                    (lower_bound - lowest).max(0.0)
                }
                Relation::SumToIdentity { left, right } => (get(left) + get(right)).max_abs_diff(&id),
            };
            RelationResidual {
                index,
                kind: rel.kind(),
                relation: rel.to_string(),
                residual,
                passed: residual <= tol,
                selfadjoint_residual,
            }
        })
        .collect();
    let passed = relations.iter().all(|r| r.passed);
    let max_residual = relations.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(RepresentationReport { relations, passed, max_residual })
}

/// The pair `p1 = diag(1, 0)`, `p2` = projection onto `(cos θ, sin θ)`, for
/// `θ ∈ [0, π/2]`.
pub fn p2_representation(theta: f64) -> Result<Representation> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::Parameter(format!("θ = {theta} outside [0, π/2]")));
    }
    Representation::from_pairs(2, [("p1", CMatrix::diag_real(&[1.0, 0.0])), ("p2", line_projection(theta))])
}

/// Projection onto the line through `(cos θ, sin θ)`.
pub fn line_projection(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_real_rows(&[&[c * c, c * s], &[c * s, s * s]])
}

/// Two-dimensional D4 witness: `p1 + p2 = I` and `p3 + p4 = I`.
pub fn d4_representation(theta: f64) -> Representation {
    let q = line_projection(theta);
    let id = CMatrix::identity(2);
    Representation::from_pairs(
        2,
        [
            ("p1", CMatrix::diag_real(&[1.0, 0.0])),
            ("p2", CMatrix::diag_real(&[0.0, 1.0])),
            ("p4", &id - &q),
            ("p3", q),
        ],
    )
    .expect("all 2x2")
}

/// Scalar commutant test (Schur).
pub fn irreducible(r: &Representation) -> Result<bool> {
    if r.assignment.is_empty() {
        return Ok(r.dim == 1);
    }
    let values: Vec<CMatrix> = r.assignment.values().cloned().collect();
    Ok(commutant_dimension(&values)? == 1)
}
