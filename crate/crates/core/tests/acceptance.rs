//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use fixalg::bundle::{classify_bundle, Bundle2, PolarGrid, Section};
use fixalg::cli::relative_standard_residual;
use fixalg::cmatrix::{standard_polynomial, BlockStructure, CMatrix};
use fixalg::fpalg::{
    canonical_form, check_membership, random_member, CanonicalName, FixedPointAlgebra, IntervalFunction,
    SampledFunction,
};
use fixalg::iso::{solve_block_combination, isomorphism_check, transport_section, IsoVerdict};
use fixalg::loops::{canonical_loop, UnitaryLoop};
use fixalg::presentations::{
    builtin_presentation, d4_representation, irreducible, p2_representation, verify_representation, Builtin,
    Representation,
};
use fixalg::rng::SplitMix64;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn canonical_classification() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for n in 2..=6 {
        for k in 0..n {
            let b = Bundle2::new(canonical_loop(n, k, 1024).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let class = classify_bundle(&b).map_err(|e| e.to_string())?;
            ensure(class == k, || format!("n = {n}, k = {k}: classified as {class}"))?;
            count += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 5.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!("{count} canonical bundles classified exactly in {elapsed:.2}s"))
}

fn winding_algebra() -> Outcome {
    let m = 1024;
    let mut rng = SplitMix64::new(2024);
    let fixed: Vec<Vec<CMatrix>> = (1..=4).map(|n| (0..3).map(|_| rng.unitary(n)).collect()).collect();
    let build = |rng: &mut SplitMix64, n: usize| -> Result<(UnitaryLoop, i64), String> {
        let mut acc = UnitaryLoop::constant(&CMatrix::identity(n), m).map_err(|e| e.to_string())?;
        let mut total = 0;
        for u in &fixed[n - 1][..2] {
            let k = rng.int_in(0, n as i64 - 1);
            let factor = canonical_loop(n, k as usize, m).and_then(|l| l.conjugate_by(u)).map_err(|e| e.to_string())?;
            acc = acc.pointwise_product(&factor).map_err(|e| e.to_string())?;
            total += k;
        }
        Ok((acc.left_mul(&fixed[n - 1][2]).map_err(|e| e.to_string())?, total))
    };
    let index = |l: &UnitaryLoop| l.winding_index().map_err(|e| e.to_string());
    for trial in 0..200 {
        let n = 1 + trial % 4;
        let (a, ka) = build(&mut rng, n)?;
        let (b, kb) = build(&mut rng, n)?;
        ensure(index(&a)? == ka, || format!("trial {trial}: index {} != {ka}", index(&a).unwrap_or(i64::MIN)))?;
        let ab = index(&a.pointwise_product(&b).map_err(|e| e.to_string())?)?;
        ensure(ab == ka + kb, || format!("trial {trial}: ind(ab) = {ab}, expected {}", ka + kb))?;
        let inv = index(&a.pointwise_adjoint().map_err(|e| e.to_string())?)?;
        ensure(inv == -ka, || format!("trial {trial}: ind(a*) = {inv}, expected {}", -ka))?;
        let fine = index(&a.refine_midpoints().map_err(|e| e.to_string())?)?;
        ensure(fine == ka, || format!("trial {trial}: resampled index {fine}, expected {ka}"))?;
    }
    Ok("200 random pairs: additivity, inversion and 2x resampling exact".into())
}

fn isomorphism_soundness() -> Outcome {
    let check = |n, m: &[usize], l1, l2, samples| isomorphism_check(n, m, l1, l2, samples).map_err(|e| e.to_string());
    match check(4, &[2, 2], 1, 3, 1024)? {
        IsoVerdict::Isomorphic { transformed_index: 3, .. } => {}
        v => return Err(format!("(4, (2,2), 1, 3): {v:?}")),
    }
    ensure(matches!(check(4, &[2, 2], 0, 1, 1024)?, IsoVerdict::CriterionFails { .. }), || {
        "(4, (2,2), 0, 1) should fail the criterion".into()
    })?;
    ensure(matches!(check(2, &[1, 1], 0, 1, 1024)?, IsoVerdict::Isomorphic { .. }), || {
        "(2, (1,1), 0, 1) should be isomorphic".into()
    })?;
    let mut certificates = 0;
    for n in 1..=6usize {
        for m in ordered_partitions(n, 3) {
            for l1 in 0..n as i64 {
                for d in -6..=6 {
                    if let IsoVerdict::Isomorphic { certificate, transformed_index } = check(n, &m, l1, l1 + d, 64)? {
                        let sewing = UnitaryLoop::diagonal_power(n, l1, 64).map_err(|e| e.to_string())?;
                        let direct = certificate
                            .phase_loop()
                            .pointwise_adjoint()
                            .and_then(|h| h.pointwise_product(&sewing))
                            .and_then(|l| l.winding_index())
                            .map_err(|e| e.to_string())?;
                        ensure(transformed_index == l1 + d && direct == l1 + d, || {
                            format!("n = {n}, m = {m:?}, l1 = {l1}, d = {d}: index {direct}")
                        })?;
                        certificates += 1;
                    }
                }
            }
        }
    }
    Ok(format!("examples hold; {certificates} certificates in the sweep all land on l2"))
}

/// Every list of at most `parts` positive integers summing to `n`.
fn ordered_partitions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    if parts == 0 {
        return vec![];
    }
    (1..=n)
        .flat_map(|first| {
            ordered_partitions(n - first, parts - 1).into_iter().map(move |rest| [vec![first], rest].concat())
        })
        .collect()
}

/// Coefficient bound of the exhaustive search. `m = (1)` with `|diff| = 12`
/// needs `|c| = 12`.
const SEARCH_BOUND: i64 = 12;

fn brute_force_solvable(m: &[usize], diff: i64) -> bool {
    match m {
        [] => diff == 0,
        [last] => diff % *last as i64 == 0 && (diff / *last as i64).abs() <= SEARCH_BOUND,
        [first, rest @ ..] => (-SEARCH_BOUND..=SEARCH_BOUND).any(|c| brute_force_solvable(rest, diff - c * *first as i64)),
    }
}

fn solver_oracle() -> Outcome {
    let mut lists: Vec<Vec<usize>> = Vec::new();
    for k in 1..=3u32 {
        for code in 0..6usize.pow(k) {
            lists.push((0..k).map(|i| 1 + code / 6usize.pow(i) % 6).collect());
        }
    }
    let mut solved = 0;
    for m in &lists {
        for diff in -12..=12 {
            let found = solve_block_combination(m, diff);
            ensure(found.is_some() == brute_force_solvable(m, diff), || {
                format!("m = {m:?}, diff = {diff}: solver says {found:?}")
            })?;
            if let Some(c) = found {
                let total: i64 = c.iter().zip(m).map(|(a, &b)| a * b as i64).sum();
                ensure(total == diff, || format!("m = {m:?}: Σ c m = {total} != {diff}"))?;
                solved += 1;
            }
        }
    }
    Ok(format!("{} block lists x 25 differences agree with exhaustive search; {solved} solutions exact", lists.len()))
}

fn amitsur_levitsky() -> Outcome {
    let rel = |xs: &[CMatrix]| relative_standard_residual(xs).map_err(|e| e.to_string());
    let mut rng = SplitMix64::new(7);
    let mut worst4 = 0.0f64;
    for _ in 0..100 {
        let xs: Vec<CMatrix> = (0..4).map(|_| rng.matrix(2)).collect();
        worst4 = worst4.max(rel(&xs)?);
    }
    ensure(worst4 < 1e-10, || format!("F4 on M2 residual {worst4:.3e}"))?;
    let mut worst6 = 0.0f64;
    for _ in 0..20 {
        let xs: Vec<CMatrix> = (0..6).map(|_| rng.matrix(3)).collect();
        worst6 = worst6.max(rel(&xs)?);
    }
    ensure(worst6 < 1e-9, || format!("F6 on M3 residual {worst6:.3e}"))?;
    let mut nonzero = 0;
    for _ in 0..100 {
        let xs: Vec<CMatrix> = (0..4).map(|_| rng.matrix(3)).collect();
        if rel(&xs)? > 1e-6 {
            nonzero += 1;
        }
    }
    ensure(nonzero >= 99, || format!("F4 on M3 nonzero in only {nonzero}/100"))?;
    let units = [CMatrix::unit(2, 0, 0), CMatrix::unit(2, 0, 1), CMatrix::unit(2, 1, 1)];
    let f3 = standard_polynomial(&units).map_err(|e| e.to_string())?.max_abs();
    ensure(f3 > 0.5, || format!("F3(e11, e12, e22) = {f3}"))?;
    Ok(format!("F4/M2 {worst4:.1e}, F6/M3 {worst6:.1e}, F4/M3 nonzero {nonzero}/100, |F3| = {f3}"))
}

fn two_projections() -> Outcome {
    let p2 = builtin_presentation(Builtin::P2).map_err(|e| e.to_string())?;
    for j in 0..100 {
        let theta = FRAC_PI_2 * (j as f64 / 99.0);
        let r = p2_representation(theta).map_err(|e| e.to_string())?;
        let report = verify_representation(&p2, &r, 1e-12).map_err(|e| e.to_string())?;
        ensure(report.passed, || format!("θ = {theta}: max residual {:.3e}", report.max_residual))?;
    }
    let diagonal = BlockStructure::simple(vec![1, 1]).expect("valid");
    for theta in [0.0, FRAC_PI_2] {
        let r = p2_representation(theta).map_err(|e| e.to_string())?;
        for m in r.assignment().values() {
            ensure(m.is_block_diagonal(&diagonal, 1e-12).map_err(|e| e.to_string())?, || {
                format!("θ = {theta}: not diagonal")
            })?;
        }
    }
    let alg = canonical_form(CanonicalName::P2);
    for g in ["p1", "p2"] {
        let f = IntervalFunction::from_fn(33, |t| p2_representation(FRAC_PI_2 * t).unwrap().get(g).unwrap().clone())
            .map_err(|e| e.to_string())?;
        let report = check_membership(&alg, &SampledFunction::Interval(f), 1e-12).map_err(|e| e.to_string())?;
        ensure(report.member, || format!("{g} is not in the interval model"))?;
    }
    let irr = |theta| irreducible(&p2_representation(theta).unwrap()).map_err(|e| e.to_string());
    ensure(irr(FRAC_PI_3)?, || "θ = π/3 should be irreducible".into())?;
    ensure(!irr(0.0)?, || "θ = 0 should be reducible".into())?;
    Ok("100 θ values verified; endpoints diagonal and in the interval model; irreducibility as expected".into())
}

fn dynkin_verification() -> Outcome {
    let get = |b| builtin_presentation(b).map_err(|e| e.to_string());
    let d4 = get(Builtin::D4)?;
    for j in 0..200 {
        let theta = std::f64::consts::PI * j as f64 / 199.0;
        let report = verify_representation(&d4, &d4_representation(theta), 1e-12).map_err(|e| e.to_string())?;
        ensure(report.passed, || format!("D4 θ = {theta}: {:.3e}", report.max_residual))?;
    }
    let e6 = get(Builtin::E6)?;
    let one = CMatrix::identity(1);
    let zero = CMatrix::zeros(1);
    let rep = Representation::from_pairs(
        1,
        [("p1", one.clone()), ("q1", one.clone()), ("r1", one), ("p2", zero.clone()), ("q2", zero.clone()), ("r2", zero)],
    )
    .map_err(|e| e.to_string())?;
    ensure(verify_representation(&e6, &rep, 1e-12).map_err(|e| e.to_string())?.passed, || "E6 witness fails".into())?;

    let e = CMatrix::diag_real(&[1.0, 0.0]);
    let broken = Representation::from_pairs(2, [("p1", e.clone()), ("p2", e.clone()), ("p3", e.clone()), ("p4", e)])
        .map_err(|e| e.to_string())?;
    let report = verify_representation(&d4, &broken, 1e-12).map_err(|e| e.to_string())?;
    let sum = report.relations.iter().find(|r| r.kind == "weighted_sum").ok_or("no sum relation")?;
    ensure(!report.passed && !sum.passed && sum.residual == 2.0, || format!("broken D4 report {report:?}"))?;

    let expected: [(CanonicalName, usize, &[&[usize]]); 4] = [
        (CanonicalName::D4, 2, &[&[1, 1], &[1, 1], &[1, 1]]),
        (CanonicalName::E6, 3, &[&[2, 1], &[1, 1, 1], &[1, 1, 1]]),
        (CanonicalName::E7, 4, &[&[2, 2], &[2, 1, 1], &[1, 1, 1, 1]]),
        (CanonicalName::E8, 6, &[&[3, 3], &[2, 2, 1, 1], &[1, 1, 1, 1, 1, 1]]),
    ];
    for (name, n, blocks) in expected {
        let alg = canonical_form(name);
        let found: Vec<&[usize]> = alg.conditions().iter().map(|c| c.structure.blocks()).collect();
        ensure(alg.n() == n && found == blocks, || format!("{name}: n = {}, blocks {found:?}", alg.n()))?;
    }
    Ok(format!("D4 family, E6 witness and canonical block data hold; broken D4 sum residual {}", sum.residual))
}

fn max_gap(a: &Section, b: &Section) -> f64 {
    let f1 = a.f1().iter().zip(b.f1().iter()).map(|((_, _, x), (_, _, y))| x.max_abs_diff(y));
    let f2 = a.f2().iter().zip(b.f2().iter()).map(|((_, _, x), (_, _, y))| x.max_abs_diff(y));
    f1.chain(f2).fold(0.0, f64::max)
}

fn transform_properties() -> Outcome {
    let err = |e: fixalg::Error| e.to_string();
    let grid = PolarGrid::new(5, 64).map_err(err)?;
    let source = FixedPointAlgebra::over_bundle(4, 1, vec![2, 2]).map_err(err)?;
    let target = FixedPointAlgebra::over_bundle(4, 3, vec![2, 2]).map_err(err)?;
    let IsoVerdict::Isomorphic { certificate, .. } = isomorphism_check(4, &[2, 2], 1, 3, 64).map_err(err)? else {
        return Err("no certificate for (4, (2,2), 1, 3)".into());
    };
    let phi = |s: &Section| transport_section(s, &certificate).map_err(err);
    let mut rng = SplitMix64::new(8);
    let (mut worst_mul, mut worst_adj) = (0.0f64, 0.0f64);
    for trial in 0..50 {
        let f = random_member(&source, &grid, 3, &mut rng).map_err(err)?;
        let g = random_member(&source, &grid, 3, &mut rng).map_err(err)?;
        let image = phi(&f)?;
        let report = check_membership(&target, &SampledFunction::Section(image.clone()), 1e-8).map_err(err)?;
        ensure(report.member, || format!("trial {trial}: image not in the target algebra: {report:?}"))?;
        let fg = f.product(&g).map_err(err)?;
        worst_mul = worst_mul.max(max_gap(&phi(&fg)?, &image.product(&phi(&g)?).map_err(err)?));
        worst_adj = worst_adj.max(max_gap(&phi(&f.adjoint())?, &image.adjoint()));
    }
    ensure(worst_mul <= 2e-8 && worst_adj <= 2e-8, || format!("residuals {worst_mul:.3e}, {worst_adj:.3e}"))?;
    Ok(format!("50 images are members; multiplicativity {worst_mul:.1e}, adjoint {worst_adj:.1e}"))
}

fn determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &["--json", "f-identity", "--n", "2", "--trials", "50", "--seed", "7"],
        &["--json", "iso-check", "--n", "4", "--blocks", "2,2", "--l1", "1", "--l2", "3"],
        &["--json", "p2-sample", "--count", "5"],
    ];
    for args in runs {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_fixalg")).args(args).output().map(|o| o.stdout).map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(!a.is_empty() && a == b, || format!("`{}` differs between runs", args.join(" ")))?;
        serde_json::from_slice::<serde_json::Value>(&a).map_err(|e| format!("`{}`: {e}", args.join(" ")))?;
    }
    Ok("f-identity, iso-check and p2-sample JSON output byte-identical across runs".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("canonical classification", canonical_classification),
        ("winding-index algebra", winding_algebra),
        ("isomorphism soundness", isomorphism_soundness),
        ("gcd solver oracle", solver_oracle),
        ("standard identities", amitsur_levitsky),
        ("two-projection model", two_projections),
        ("Dynkin verification", dynkin_verification),
        ("isomorphism transform", transform_properties),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
