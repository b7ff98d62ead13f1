//! Acceptance criteria, one PASS/FAIL line each. `INFO` lines carry
//! supporting measurements and do not affect the verdict.
//!
//! Exits with status 1 when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rotation_evl::cf::{CfSpec, ConvergentTable};
use rotation_evl::harness::{self, default_grid, Command, RunConfig, COMPARE_CSV, MANIFEST_JSON};
use rotation_evl::quadratic::Quadratic;
use rotation_evl::sim::{
    empirical_survival, entry_cdf_form, finite_k_survival, oracle_budget, EntrySweep, SamplingOptions,
};
use rotation_evl::theory::{
    constant_type_survival, fixed_point_check, limiting_survival, phi_y, profile_analytic, ExtReal, LimitProfile,
    StepSurvival,
};

type Check = Result<(bool, String), String>;

const SEED: u64 = 20_240_917;
const SAMPLES: u64 = 20_000;
/// Largest arc union the streaming oracle holds in 5 GB (about 47 bytes per arc).
const ORACLE_ARC_CAP: u64 = 60_000_000;

fn six_specs() -> Vec<CfSpec> {
    vec![
        CfSpec::constant(1),
        CfSpec::constant(2),
        CfSpec::constant(3),
        CfSpec::block(3),
        CfSpec::block(4),
        CfSpec::affine(1, 1),
    ]
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn law(spec: &CfSpec) -> Result<(LimitProfile, StepSurvival), String> {
    let p = profile_analytic(spec, 8).map_err(|e| e.to_string())?;
    let s = limiting_survival(&p).map_err(|e| e.to_string())?;
    Ok((p, s))
}

/// A table deep enough for `H_{q_k}` on `[0, y_max]`, with enclosures far
/// below the tolerances used here.
fn finite_table(spec: &CfSpec, k: usize, y_max: f64) -> Result<ConvergentTable, String> {
    let mut depth = k + 4;
    loop {
        let t = ConvergentTable::with_precision(spec, depth, 2 * depth + 40).map_err(|e| e.to_string())?;
        let bound = t.q_f64(k) * y_max * 2.0;
        if t.q_f64(depth - 1) > bound {
            return Ok(t);
        }
        depth += 4;
    }
}

fn sup_finite_vs_limit(spec: &CfSpec, k: usize) -> Result<(f64, Vec<f64>), String> {
    let (p, s) = law(spec)?;
    let grid = default_grid(&p, &s);
    let t = finite_table(spec, k, grid[grid.len() - 1])?;
    let mut sup = 0f64;
    for &y in &grid {
        let fk = finite_k_survival(&t, k, y).map_err(|e| e.to_string())?.to_f64();
        let h = s.eval_f64(y).map_err(|e| e.to_string())?;
        sup = sup.max((fk - h).abs());
    }
    Ok((sup, grid))
}

struct McRun {
    sup_emp_finite: f64,
    sup_emp_limit: f64,
    aborted: u64,
}

fn monte_carlo(spec: &CfSpec, k: usize, grid: &[f64]) -> Result<McRun, String> {
    let (_, s) = law(spec)?;
    let t = finite_table(spec, k, grid[grid.len() - 1])?;
    let e = empirical_survival(&t, k, SAMPLES, SEED, grid, &SamplingOptions::default()).map_err(|e| e.to_string())?;
    let est = e.estimates();
    let mut run = McRun {
        sup_emp_finite: 0.0,
        sup_emp_limit: 0.0,
        aborted: e.aborted,
    };
    for (i, &y) in grid.iter().enumerate() {
        let fk = finite_k_survival(&t, k, y).map_err(|e| e.to_string())?.to_f64();
        let h = s.eval_f64(y).map_err(|e| e.to_string())?;
        run.sup_emp_finite = run.sup_emp_finite.max((est[i] - fk).abs());
        run.sup_emp_limit = run.sup_emp_limit.max((est[i] - h).abs());
    }
    Ok(run)
}

fn criterion_1() -> Check {
    let tol = rat(1, 1) / BigRational::from_integer(BigInt::from(10).pow(30));
    let mut worst = 0f64;
    let mut failures = Vec::new();
    for spec in six_specs() {
        let base = ConvergentTable::with_precision(&spec, 20, 22).map_err(|e| e.to_string())?;
        let t = base
            .refine_until(|t| (0..=20).all(|k| t.kac_enclosure(k).map(|e| e.width() < tol).unwrap_or(false)))
            .map_err(|e| format!("{spec}: {e}"))?;
        for k in 0..=20 {
            let e = t.kac_enclosure(k).map_err(|e| e.to_string())?;
            worst = worst.max(e.width_f64());
            if !e.contains(&BigRational::one()) || e.width() >= tol {
                failures.push(format!("{spec} k={k}"));
            }
        }
    }
    Ok((
        failures.is_empty(),
        format!("Kac identity on 6 specs, k<=20; widest enclosure {worst:.1e}; failures: {failures:?}"),
    ))
}

fn criterion_2() -> Check {
    let tol = rat(1, 1) / BigRational::from_integer(BigInt::from(10).pow(20));
    let budget = oracle_budget().max(ORACLE_ARC_CAP);
    let mut checked = 0u64;
    let mut mismatches = Vec::new();
    let mut over_budget = Vec::new();
    for spec in six_specs() {
        for k in 0..=10usize {
            let probe = ConvergentTable::with_precision(&spec, k + 2, k + 4).map_err(|e| e.to_string())?;
            let n = probe.q(k + 1).map_err(|e| e.to_string())?.clone();
            if n > BigInt::from(budget) {
                over_budget.push(format!("{spec} k={k} needs {n} arcs"));
                continue;
            }
            let n = u64::try_from(&n).expect("within budget");
            // Enclosure widths are |coeff|·width(α); coefficients stay below q_{k+1}² · 4.
            let scale = BigRational::from_integer(BigInt::from(n) * BigInt::from(n) * 4);
            let t = probe.refine_until(|t| t.alpha().width() * &scale < tol).map_err(|e| e.to_string())?;
            let coeff_cap = (&tol / t.alpha().width()).floor().to_integer();
            let mut sweep = EntrySweep::new(&t, k).map_err(|e| e.to_string())?;
            for s in 0..=n {
                let oracle = if s == 0 {
                    sweep.measure()
                } else {
                    sweep.step().map_err(|e| format!("{spec} k={k} s={s}: {e}"))?
                };
                let formula = entry_cdf_form(&t, k, &BigRational::from_integer(BigInt::from(s)))
                    .map_err(|e| e.to_string())?;
                // Equal forms have identical enclosures; otherwise compare the enclosures.
                let ok = if oracle == formula {
                    oracle.coeff.abs() <= coeff_cap
                } else {
                    let (a, b) = (formula.enclosure(t.alpha()), oracle.enclosure(t.alpha()));
                    a.overlaps(&b) && a.width() < tol && b.width() < tol
                };
                if !ok && mismatches.len() < 5 {
                    mismatches.push(format!("{spec} k={k} s={s}"));
                }
                checked += 1;
            }
        }
    }
    if !over_budget.is_empty() {
        println!("INFO  criterion 2: beyond the {budget}-arc oracle cap: {over_budget:?}");
    }
    Ok((
        mismatches.is_empty() && over_budget.is_empty(),
        format!(
            "{checked} (spec, k, s) triples agree; mismatches {mismatches:?}; {} (spec, k) pairs beyond budget",
            over_budget.len()
        ),
    ))
}

fn criterion_3() -> Check {
    let two = constant_type_survival(2).map_err(|e| e.to_string())?;
    let v0_two = two.value(0).ok_or("no plateau")?;
    let half_exact = v0_two == ExtReal::Exact(Quadratic::rational(rat(1, 2)));

    let golden = constant_type_survival(1).map_err(|e| e.to_string())?;
    let v0 = golden.value(0).ok_or("no plateau")?.to_f64();
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let oracle = 1.0 / (2.0 - alpha);
    let golden_ok = (v0 - oracle).abs() <= 1e-12 && (v0 - 0.7236067977).abs() <= 1e-10;

    let (_, block) = law(&CfSpec::block(3))?;
    let expect = [
        (rat(1, 2), rat(1, 1)),
        (rat(999, 1000), rat(1, 1)),
        (rat(1, 1), rat(1, 2)),
        (rat(3, 2), rat(1, 2)),
        (rat(1999, 1000), rat(1, 2)),
        (rat(2, 1), rat(0, 1)),
        (rat(7, 1), rat(0, 1)),
        (rat(1000, 1), rat(0, 1)),
    ];
    let mut block_ok = true;
    for (y, v) in expect {
        let h = block
            .eval_ext(&ExtReal::rational(y.clone()))
            .map_err(|e| e.to_string())?;
        block_ok &= h == ExtReal::Exact(Quadratic::rational(v));
    }
    Ok((
        half_exact && golden_ok && block_ok,
        format!("c=2 v0 = {v0_two} (exact 1/2: {half_exact}); c=1 v0 = {v0:.13} vs 1/(2-α) = {oracle:.13}; block:3 staircase exact: {block_ok}"),
    ))
}

fn criterion_4() -> Check {
    let (sup, grid) = sup_finite_vs_limit(&CfSpec::constant(1), 16)?;
    Ok((
        sup <= 1e-2,
        format!("golden mean k=16, {} grid points: sup|H_qk - H| = {sup:.3e} (tol 1e-2)", grid.len()),
    ))
}

fn criterion_5() -> Check {
    let cases = [(CfSpec::constant(1), 16usize), (CfSpec::constant(2), 16), (CfSpec::block(3), 270)];
    let mut all = true;
    let mut parts = Vec::new();
    for (spec, k) in cases {
        let (p, s) = law(&spec)?;
        let grid = default_grid(&p, &s);
        let start = Instant::now();
        let r = monte_carlo(&spec, k, &grid)?;
        let ok = r.sup_emp_finite <= 0.02 && r.sup_emp_limit <= 0.03 && r.aborted == 0;
        all &= ok;
        println!(
            "INFO  criterion 5: {spec} k={k}: sup|Ĥ-H_qk| = {:.4}, sup|Ĥ-H| = {:.4}, aborted = {}, {:.1?}",
            r.sup_emp_finite,
            r.sup_emp_limit,
            r.aborted,
            start.elapsed()
        );
        parts.push(format!("{spec} k={k} {}", if ok { "ok" } else { "fails" }));
    }
    for k in [15usize, 30, 60, 120, 270] {
        let (sup, _) = sup_finite_vs_limit(&CfSpec::block(3), k)?;
        println!("INFO  criterion 5: block:3 exact sup|H_qk - H| at k={k}: {sup:.4}");
    }
    Ok((all, format!("{SAMPLES} samples, seed {SEED}: {}", parts.join(", "))))
}

fn concentration(spec: &CfSpec, k: usize) -> Result<(f64, f64, f64, u64), String> {
    let grid = [0.99, 1.01];
    let t = finite_table(spec, k, 1.01)?;
    let e = empirical_survival(&t, k, SAMPLES, SEED, &grid, &SamplingOptions::default()).map_err(|e| e.to_string())?;
    let exact = finite_k_survival(&t, k, 1.01).map_err(|e| e.to_string())?.to_f64();
    let est = e.estimates();
    Ok((est[0], est[1], exact, e.aborted))
}

fn criterion_6() -> Check {
    let mut all = true;
    let mut parts = Vec::new();
    for spec in [CfSpec::affine(1, 1), CfSpec::block(2)] {
        let (_, s) = law(&spec)?;
        let indicator = s.is_indicator()
            && s.eval_f64(0.99).map_err(|e| e.to_string())? == 1.0
            && s.eval_f64(1.0).map_err(|e| e.to_string())? == 0.0
            && s.eval_f64(50.0).map_err(|e| e.to_string())? == 0.0;
        let (h99, h101, exact, aborted) = concentration(&spec, 14)?;
        let ok = indicator && h99 >= 0.999 && h101 <= 0.05 && aborted == 0;
        all &= ok;
        parts.push(format!(
            "{spec}: indicator {indicator}, k=14 Ĥ(0.99) = {h99:.4}, Ĥ(1.01) = {h101:.4} (exact H_qk(1.01) = {exact:.4})"
        ));
    }
    for (spec, k) in [(CfSpec::affine(1, 1), 20usize), (CfSpec::block(2), 200)] {
        let (h99, h101, exact, _) = concentration(&spec, k)?;
        println!(
            "INFO  criterion 6: {spec} k={k}: Ĥ(0.99) = {h99:.4}, Ĥ(1.01) = {h101:.4}, exact H_qk(1.01) = {exact:.4}"
        );
    }
    Ok((all, parts.join("; ")))
}

fn criterion_7() -> Check {
    let mut all = true;
    let mut checked = 0;
    let mut notes = Vec::new();
    for (spec, js) in [
        (CfSpec::constant(1), vec![0usize, 1, 2, 3]),
        (CfSpec::constant(2), vec![0, 1, 2, 3]),
        (CfSpec::block(3), vec![1]),
    ] {
        let p = profile_analytic(&spec, 8).map_err(|e| e.to_string())?;
        for j in js {
            let lo = p.gamma(j).ok_or("missing γ")?.to_f64();
            let hi = p.gamma(j + 1).ok_or("missing γ")?.to_f64();
            let y = 0.5 * (lo + hi);
            let r = fixed_point_check(&p, y).map_err(|e| e.to_string())?;
            let knots = phi_y(&p, j).map_err(|e| e.to_string())?;
            let (x1, f1) = &knots.knots[1];
            let diagonal = x1.is_exact() && x1 == f1;
            let ok = r.j == j && r.passed && r.difference <= 1e-10 && diagonal;
            all &= ok;
            checked += 1;
            if !ok {
                notes.push(format!("{spec} j={j}: {r:?}"));
            }
        }
    }
    Ok((all, format!("{checked} plateaus: fixed point and diagonal knot; failures {notes:?}")))
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = RunConfig {
        command: Command::Compare,
        spec: "periodic:1".into(),
        k: vec![16],
        samples: SAMPLES,
        seed: SEED,
        out: dir.path().join("first"),
        ..RunConfig::default()
    };
    harness::run(&first).map_err(|e| e.to_string())?;
    let manifest = first.out.join(MANIFEST_JSON);
    let reference = std::fs::read(first.out.join(COMPARE_CSV)).map_err(|e| e.to_string())?;
    let mut identical = true;
    for (name, threads) in [("again", None), ("one", Some(1)), ("three", Some(3))] {
        let mut c = RunConfig::from_manifest(&manifest).map_err(|e| e.to_string())?;
        c.out = dir.path().join(name);
        c.threads = threads;
        harness::run(&c).map_err(|e| e.to_string())?;
        let bytes = std::fs::read(c.out.join(COMPARE_CSV)).map_err(|e| e.to_string())?;
        identical &= bytes == reference;
    }
    Ok((
        identical,
        format!("compare re-run 3 times from manifest (default, 1 and 3 threads): byte-identical {identical}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("exact identity suite", criterion_1),
        ("oracle equivalence", criterion_2),
        ("closed-form regression", criterion_3),
        ("finite-k convergence", criterion_4),
        ("Monte Carlo convergence", criterion_5),
        ("degenerate laws", criterion_6),
        ("fixed-point suite", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {} ({name}): {detail} [{:.1?}]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
