//! Command implementations behind the `fixalg` binary.
//!
//! Every command returns a [`CommandResult`]; the binary only parses flags,
//! prints, and maps [`Status`] to an exit code. Input problems (unreadable
//! files, bad JSON, invalid parameters) produce `Status::Error`; a
//! mathematically checked property that fails produces `Status::Violation`.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bundle::{validate_section, Bundle2, Section, EQUATOR_TOL};
use crate::cmatrix::{standard_polynomial, CMatrix, DEFAULT_TOL, MAX_STANDARD_DEGREE};
use crate::fpalg::{canonical_form, check_membership, CanonicalName, FixedPointAlgebra, SampledFunction};
use crate::iso::{isomorphism_check, IsoVerdict};
use crate::loops::{parse_canonical_shorthand, UnitaryLoop};
use crate::presentations::{builtin_presentation, p2_representation, verify_representation, Builtin, Representation, StarPresentation};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Violation,
    CriterionFails,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Violation | Status::CriterionFails => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub status: Status,
    pub payload: Value,
    pub human_text: String,
}

impl CommandResult {
    fn new(status: Status, payload: impl Serialize, human_text: String) -> Self {
        let payload = serde_json::to_value(payload).expect("report types serialize");
        Self { status, payload, human_text }
    }

    pub fn error(message: impl std::fmt::Display) -> Self {
        let message = message.to_string();
        Self { status: Status::Error, payload: json!({ "error": message }), human_text: format!("error: {message}") }
    }

    /// `{"status": .., "payload": ..}`, pretty-printed.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&json!({ "status": self.status, "payload": self.payload }))
            .expect("values serialize")
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

type CmdResult<T> = std::result::Result<T, String>;

fn read_json<T: DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> CmdResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    std::fs::write(path, text + "\n").map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// A loop from `canonical:n,k[,M]` or a loop JSON file.
pub fn load_loop(source: &str) -> CmdResult<UnitaryLoop> {
    if source.starts_with("canonical:") {
        parse_canonical_shorthand(source).map_err(|e| e.to_string())
    } else {
        read_json(Path::new(source))
    }
}

/// A bundle from `canonical:n,k[,M]` or a bundle JSON file.
pub fn load_bundle(source: &str) -> CmdResult<Bundle2> {
    if source.starts_with("canonical:") {
        Bundle2::new(load_loop(source)?).map_err(|e| e.to_string())
    } else {
        read_json(Path::new(source))
    }
}

fn run(f: impl FnOnce() -> CmdResult<CommandResult>) -> CommandResult {
    f().unwrap_or_else(CommandResult::error)
}

pub fn cmd_index(source: &str) -> CommandResult {
    run(|| {
        let l = load_loop(source)?;
        let index = l.winding_index().map_err(|e| e.to_string())?;
        let text = format!("winding index {index} (n = {}, {} samples)", l.n(), l.sample_count());
        Ok(CommandResult::new(Status::Ok, json!({ "index": index, "n": l.n(), "samples": l.sample_count() }), text))
    })
}

pub fn cmd_classify(source: &str) -> CommandResult {
    run(|| {
        let b = load_bundle(source)?;
        let index = b.sewing().winding_index().map_err(|e| e.to_string())?;
        let class = b.classify().map_err(|e| e.to_string())?;
        let text = format!("bundle class {class} mod {} (sewing index {index})", b.n());
        Ok(CommandResult::new(Status::Ok, json!({ "n": b.n(), "index": index, "class": class }), text))
    })
}

pub fn cmd_validate_section(path: &Path, tol: f64) -> CommandResult {
    run(|| {
        let s: Section = read_json(path)?;
        let report = validate_section(&s, tol);
        let (status, text) = if report.is_empty() {
            (Status::Ok, format!("section valid (max equator residual {:.3e})", report.max_equator_residual))
        } else {
            let mut t = format!(
                "section invalid: {} malformed samples, {} equator violations (max residual {:.3e})",
                report.malformed.len(),
                report.equator_violations.len(),
                report.max_equator_residual
            );
            for v in report.equator_violations.iter().take(5) {
                let _ = write!(t, "\n  angle {}: residual {:.3e}", v.angle, v.residual);
            }
            (Status::Violation, t)
        };
        Ok(CommandResult::new(status, report, text))
    })
}

pub fn cmd_iso_check(
    n: usize,
    blocks: &[usize],
    l1: i64,
    l2: i64,
    samples: usize,
    emit_certificate: Option<&Path>,
) -> CommandResult {
    run(|| {
        let verdict = isomorphism_check(n, blocks, l1, l2, samples).map_err(|e| e.to_string())?;
        Ok(match verdict {
            IsoVerdict::Isomorphic { certificate, transformed_index } => {
                if let Some(path) = emit_certificate {
                    write_json(path, &certificate)?;
                }
                let c = certificate.coefficients();
                let text = format!(
                    "isomorphic: B_{{{n},{l1}}}{blocks:?} ~ B_{{{n},{l2}}}{blocks:?}; c = {c:?}, transformed index {transformed_index}"
                );
                let payload = json!({
                    "verdict": "isomorphic",
                    "n": n,
                    "blocks": blocks,
                    "l1": l1,
                    "l2": l2,
                    "c": c,
                    "transformed_index": transformed_index,
                    "certificate_file": emit_certificate.map(|p| p.display().to_string()),
                });
                CommandResult::new(Status::Ok, payload, text)
            }
            IsoVerdict::CriterionFails { gcd, diff, annotation } => {
                let text = format!("criterion fails: gcd {gcd} does not divide l1 - l2 = {diff}; {annotation}");
                let payload = json!({
                    "verdict": "criterion_fails",
                    "n": n,
                    "blocks": blocks,
                    "l1": l1,
                    "l2": l2,
                    "gcd": gcd,
                    "diff": diff,
                    "annotation": annotation,
                });
                CommandResult::new(Status::CriterionFails, payload, text)
            }
        })
    })
}

pub fn cmd_canonical(name: &str) -> CommandResult {
    run(|| {
        let name: CanonicalName = name.parse().map_err(|e: crate::Error| e.to_string())?;
        let alg = canonical_form(name);
        let mut text = format!("{name}: n = {}, base {:?}", alg.n(), alg.base());
        for c in alg.conditions() {
            let _ = write!(text, "\n  {:?}: blocks {:?}", c.location, c.structure.blocks());
        }
        let mut payload = serde_json::to_value(&alg).expect("algebras serialize");
        payload["name"] = json!(name.to_string());
        Ok(CommandResult::new(Status::Ok, payload, text))
    })
}

/// A canonical algebra name or an algebra JSON file.
pub fn load_algebra(source: &str) -> CmdResult<FixedPointAlgebra> {
    match source.parse::<CanonicalName>() {
        Ok(name) => Ok(canonical_form(name)),
        Err(_) => read_json(Path::new(source)),
    }
}

pub fn cmd_membership(algebra: &str, function: &Path, tol: f64) -> CommandResult {
    run(|| {
        let alg = load_algebra(algebra)?;
        let f: SampledFunction = read_json(function)?;
        let report = check_membership(&alg, &f, tol).map_err(|e| e.to_string())?;
        let mut text = if report.member { "member".to_string() } else { "not a member".to_string() };
        if let Some(s) = &report.section {
            let _ = write!(text, "\n  section: max equator residual {:.3e}", s.max_equator_residual);
        }
        for c in &report.conditions {
            let mark = if c.passed { "ok" } else { "FAIL" };
            let _ = write!(text, "\n  condition {} at {:?}: residual {:.3e} {mark}", c.index, c.location, c.residual);
        }
        let status = if report.member { Status::Ok } else { Status::Violation };
        Ok(CommandResult::new(status, report, text))
    })
}

/// A built-in presentation name or a presentation JSON file.
pub fn load_presentation(source: &str) -> CmdResult<StarPresentation> {
    match source.parse::<Builtin>() {
        Ok(b) => builtin_presentation(b).map_err(|e| e.to_string()),
        Err(crate::Error::UnknownName(_)) => read_json(Path::new(source)),
        Err(e) => Err(e.to_string()),
    }
}

pub fn cmd_verify(presentation: &str, rep: &Path, tol: f64) -> CommandResult {
    run(|| {
        let p = load_presentation(presentation)?;
        let r: Representation = read_json(rep)?;
        let report = verify_representation(&p, &r, tol).map_err(|e| e.to_string())?;
        let mut text = format!(
            "{} (dim {}, max residual {:.3e})",
            if report.passed { "representation verified" } else { "representation fails" },
            r.dim(),
            report.max_residual
        );
        for rel in report.relations.iter().filter(|r| !r.passed) {
            let _ = write!(text, "\n  {}: residual {:.3e}", rel.relation, rel.residual);
        }
        let status = if report.passed { Status::Ok } else { Status::Violation };
        Ok(CommandResult::new(status, report, text))
    })
}

/// Default pass threshold for the relative `F_{2n}` residual on `M_n`.
pub fn f_identity_threshold(n: usize) -> f64 {
    match n {
        0..=2 => 1e-10,
        3 => 1e-9,
        _ => 1e-8,
    }
}

/// `max |F(x_1, .., x_N)| / Π ||x_i||_F`.
pub fn relative_standard_residual(xs: &[CMatrix]) -> crate::Result<f64> {
    let f = standard_polynomial(xs)?;
    let scale: f64 = xs.iter().map(CMatrix::frobenius_norm).product();
    Ok(if scale == 0.0 { f.max_abs() } else { f.max_abs() / scale })
}

/// `F_{2n}` on `trials` seeded random `n x n` matrices.
pub fn cmd_f_identity(n: usize, trials: usize, seed: u64, tol: Option<f64>) -> CommandResult {
    run(|| {
        let degree = 2 * n;
        if n == 0 || degree > MAX_STANDARD_DEGREE {
            return Err(format!("n must be in 1..={}", MAX_STANDARD_DEGREE / 2));
        }
        if trials == 0 {
            return Err("need at least one trial".into());
        }
        let threshold = tol.unwrap_or_else(|| f_identity_threshold(n));
        let mut rng = SplitMix64::new(seed);
        let mut worst = 0.0f64;
        for _ in 0..trials {
            let xs: Vec<CMatrix> = (0..degree).map(|_| rng.matrix(n)).collect();
            worst = worst.max(relative_standard_residual(&xs).map_err(|e| e.to_string())?);
        }
        let passed = worst < threshold;
        let text = format!(
            "F_{degree} on M_{n}: max relative residual {worst:.3e} over {trials} trials (seed {seed}), threshold {threshold:.0e}: {}",
            if passed { "identity holds" } else { "identity violated" }
        );
        let payload = json!({
            "n": n,
            "degree": degree,
            "trials": trials,
            "seed": seed,
            "max_relative_residual": worst,
            "threshold": threshold,
            "passed": passed,
        });
        Ok(CommandResult::new(if passed { Status::Ok } else { Status::Violation }, payload, text))
    })
}

/// `count` members of the two-projection family on an even θ grid over
/// `[0, π/2]`.
pub fn cmd_p2_sample(count: usize) -> CommandResult {
    run(|| {
        if count < 2 {
            return Err("need at least 2 samples".into());
        }
        let samples = (0..count)
            .map(|j| {
                let theta = std::f64::consts::FRAC_PI_2 * (j as f64 / (count - 1) as f64);
                let rep = p2_representation(theta).map_err(|e| e.to_string())?;
                Ok(json!({ "theta": theta, "representation": rep }))
            })
            .collect::<CmdResult<Vec<_>>>()?;
        let text = format!("{count} representations of P2 on θ ∈ [0, π/2]");
        Ok(CommandResult::new(Status::Ok, json!({ "samples": samples }), text))
    })
}

/// Default tolerance for section and membership checks.
pub const SECTION_TOL: f64 = EQUATOR_TOL;

/// Default tolerance for representation checks.
pub const RELATION_TOL: f64 = DEFAULT_TOL;
