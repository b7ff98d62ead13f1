use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use super::config::{Command, Manifest, RunConfig, Tolerances};
use super::grid::GridSpec;
use super::plot::{render, step_points, Series};
use super::HarnessError;
use crate::cf::{CfKind, CfSpec, ConvergentTable};
use crate::sim::{
    empirical_survival, entry_cdf_form, finite_k_survival, EntrySweep, oracle_budget, SamplingOptions,
};
use crate::theory::{
    constant_type_alpha, fixed_point_check, limiting_survival, phi_y, profile_analytic, profile_numeric, ExtReal,
    LimitProfile, StepSurvival, TheoryError,
};

pub const COMPARE_CSV: &str = "compare.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

#[derive(Clone, Debug)]
pub struct Outcome {
    pub passed: bool,
    /// Files written, manifest last.
    pub outputs: Vec<PathBuf>,
    pub summary: String,
}

struct Artifact {
    name: String,
    bytes: Vec<u8>,
}

struct Produced {
    files: Vec<Artifact>,
    passed: bool,
    summary: String,
    ks: Vec<usize>,
    grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub k: usize,
    pub y: f64,
    pub h_limit: f64,
    pub h_finite_k: f64,
    pub h_finite_k_width: f64,
    pub h_empirical: f64,
    pub dev_empirical_finite: f64,
    pub dev_empirical_limit: f64,
    pub dev_finite_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub k: usize,
    pub q_k: String,
    pub sup_empirical_finite: f64,
    pub sup_empirical_limit: f64,
    pub sup_finite_limit: f64,
    pub max_enclosure_width: f64,
    pub aborted: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub spec: String,
    pub seed: u64,
    pub n_samples: u64,
    pub tolerances: Tolerances,
    pub rows: Vec<ComparisonRow>,
    pub summaries: Vec<ComparisonSummary>,
    pub failed_samples: u64,
    pub passed: bool,
}

impl ComparisonReport {
    fn judge(&mut self) {
        let t = &self.tolerances;
        self.failed_samples = self.summaries.iter().map(|s| s.aborted).sum();
        self.passed = self.failed_samples == 0
            && self.summaries.iter().all(|s| {
                s.sup_empirical_finite <= t.empirical_vs_finite
                    && s.sup_empirical_limit <= t.empirical_vs_limit
                    && s.sup_finite_limit <= t.finite_vs_limit
                    && s.max_enclosure_width <= t.enclosure_width
            });
    }
}

/// Runs one command and writes its outputs and manifest under `config.out`.
pub fn run(config: &RunConfig) -> Result<Outcome, HarnessError> {
    let spec = config.validate()?;
    let produced = match config.command {
        Command::Limits => cmd_limits(config, &spec)?,
        Command::Evl => cmd_evl(config, &spec)?,
        Command::EntryDist => cmd_entry_dist(config, &spec)?,
        Command::Compare => cmd_compare(config, &spec)?,
        Command::Phi => cmd_phi(config, &spec)?,
    };
    let mut recorded = config.clone();
    if !produced.ks.is_empty() {
        recorded.k = produced.ks.clone();
    }
    let mut names: Vec<String> = produced.files.iter().map(|a| a.name.clone()).collect();
    names.push(MANIFEST_JSON.into());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: config.command,
        spec: spec.to_string(),
        seed: config.seed,
        config: recorded,
        resolved_k: produced.ks,
        resolved_grid: produced.grid,
        outputs: names,
    };
    let mut files = produced.files;
    files.push(Artifact {
        name: MANIFEST_JSON.into(),
        bytes: serde_json::to_vec_pretty(&manifest)?,
    });
    let outputs = write_outputs(&config.out, &files)?;
    Ok(Outcome {
        passed: produced.passed,
        outputs,
        summary: produced.summary,
    })
}

fn write_outputs(dir: &Path, files: &[Artifact]) -> Result<Vec<PathBuf>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|a| {
            let p = dir.join(&a.name);
            std::fs::write(&p, &a.bytes)?;
            Ok(p)
        })
        .collect()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))
}

fn fmt_ext(e: &ExtReal) -> String {
    if e.is_infinite() {
        "inf".into()
    } else {
        e.to_f64().to_string()
    }
}

fn fmt_exact(e: &ExtReal) -> String {
    match e {
        ExtReal::Exact(q) => q.to_string(),
        ExtReal::Infinite => "inf".into(),
        ExtReal::Approx { .. } => String::new(),
    }
}

fn fmt_opt(e: Option<ExtReal>) -> String {
    e.map(|e| fmt_ext(&e)).unwrap_or_default()
}

/// `c` when α = [c, c, c, ...].
fn constant_c(spec: &CfSpec) -> Option<u64> {
    match &spec.kind {
        CfKind::EventuallyPeriodic { preperiod, period } if preperiod.is_empty() && period.len() == 1 => {
            Some(period[0])
        }
        CfKind::Affine { slope: 0, offset } => Some(*offset),
        _ => None,
    }
}

fn analytic_profile(spec: &CfSpec, jmax: usize) -> Result<Option<LimitProfile>, HarnessError> {
    match profile_analytic(spec, jmax) {
        Ok(p) => Ok(Some(p)),
        Err(TheoryError::UnsupportedSpec(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Ratios along the upper half of `K ∩ [0, numeric_depth]`.
fn numeric_profile(config: &RunConfig, spec: &CfSpec) -> Result<LimitProfile, HarnessError> {
    let avail = spec.available_terms();
    let depth = (config.numeric_depth + config.jmax).min(avail.saturating_sub(2));
    if depth < config.jmax + 2 {
        return Err(HarnessError::Config(format!(
            "non-convergent: only {avail} partial quotients available for jmax = {}",
            config.jmax
        )));
    }
    let table = ConvergentTable::with_precision(spec, depth, (2 * depth).min(avail))?;
    let hi = depth - config.jmax;
    let ks = spec.k_subsequence.members_in(hi / 2, hi);
    match profile_numeric(&table, &ks, config.jmax, config.tolerances.numeric_profile) {
        Ok(p) => Ok(p),
        Err(TheoryError::InsufficientDepth(m)) => Err(HarnessError::Config(format!("non-convergent: {m}"))),
        Err(e) => Err(e.into()),
    }
}

/// The analytic profile when one exists, the numeric one otherwise.
fn primary_profile(config: &RunConfig, spec: &CfSpec) -> Result<LimitProfile, HarnessError> {
    match analytic_profile(spec, config.jmax)? {
        Some(p) => Ok(p),
        None => numeric_profile(config, spec),
    }
}

fn limit_law(config: &RunConfig, spec: &CfSpec) -> Result<(LimitProfile, StepSurvival, Vec<f64>), HarnessError> {
    let profile = primary_profile(config, spec)?;
    let survival = limiting_survival(&profile)?;
    let grid = config.grid.parse::<GridSpec>()?.resolve(&profile, &survival)?;
    Ok((profile, survival, grid))
}

/// `q_0, q_1, …` up to the first index past `bound`, plus one more.
fn denominators_past(spec: &CfSpec, bound: &BigInt) -> Result<Vec<BigInt>, HarnessError> {
    let avail = spec.available_terms();
    let mut qs = vec![BigInt::from(1), BigInt::from(spec.term(1)?)];
    while qs.len() <= avail && (&qs[qs.len() - 2] <= bound) {
        let k = qs.len();
        let next = BigInt::from(spec.term(k)?) * &qs[k - 1] + &qs[k - 2];
        qs.push(next);
    }
    Ok(qs)
}

/// A table of depth `depth` whose α enclosure is narrow enough that forms
/// with coefficients up to `q_depth²` are pinned to `tol / 16`.
fn precise_table(spec: &CfSpec, depth: usize, tol: f64) -> Result<ConvergentTable, HarnessError> {
    let tol = BigRational::from_float(tol / 16.0).ok_or_else(|| HarnessError::Config("bad tolerance".into()))?;
    let base = ConvergentTable::with_precision(spec, depth, depth + 2)?;
    let q = BigRational::from_integer(base.q(depth)?.clone());
    let scale = &q * &q;
    Ok(base.refine_until(|t| t.alpha().width() * &scale <= tol)?)
}

fn cmd_limits(config: &RunConfig, spec: &CfSpec) -> Result<Produced, HarnessError> {
    let analytic = analytic_profile(spec, config.jmax)?;
    let numeric = numeric_profile(config, spec);
    let header = [
        "source", "j", "nu", "theta", "gamma", "delta", "gamma_err", "delta_err", "gamma_exact", "delta_exact",
    ];
    let mut rows = Vec::new();
    let mut emit = |name: &str, p: &LimitProfile| {
        for j in 0..=p.jmax {
            let (nu, theta) = if j == 0 { (None, None) } else { (p.nu(j), p.theta(j)) };
            let g = p.gamma(j).expect("within jmax");
            let d = p.delta(j).expect("within jmax");
            rows.push(vec![
                name.to_string(),
                j.to_string(),
                fmt_opt(nu),
                fmt_opt(theta),
                fmt_ext(&g),
                fmt_ext(&d),
                g.err().to_string(),
                d.err().to_string(),
                fmt_exact(&g),
                fmt_exact(&d),
            ]);
        }
    };
    if let Some(p) = &analytic {
        emit("analytic", p);
    }
    if let Ok(p) = &numeric {
        emit("numeric", p);
    }

    let mut agreement = Vec::new();
    if let (Some(a), Ok(n)) = (&analytic, &numeric) {
        for j in 0..=a.jmax.min(n.jmax) {
            for (name, x, y) in [
                ("gamma", a.gamma(j).unwrap(), n.gamma(j).unwrap()),
                ("delta", a.delta(j).unwrap(), n.delta(j).unwrap()),
            ] {
                let diff = match (x.is_infinite(), y.is_infinite()) {
                    (true, true) => 0.0,
                    (false, false) => (x.to_f64() - y.to_f64()).abs(),
                    _ => f64::INFINITY,
                };
                let bar = y.err() + x.err() + 1e-12;
                agreement.push(json!({
                    "j": j, "quantity": name, "difference": diff, "error_bar": bar, "within": diff <= bar,
                }));
            }
        }
    }
    let numeric_json = match &numeric {
        Ok(p) => serde_json::to_value(&p.diagnostics)?,
        Err(e) => json!({ "error": e.to_string(), "non_convergent": true }),
    };
    let converged = matches!(&numeric, Ok(p) if p.diagnostics.as_ref().map_or(true, |d| d.converged()));
    let passed = analytic.is_some() || converged;
    let report = json!({
        "spec": spec.to_string(),
        "k_subsequence": spec.k_subsequence.to_string(),
        "analytic": analytic.is_some(),
        "numeric": numeric_json,
        "agreement": agreement,
        "passed": passed,
    });
    let summary = match (&analytic, &numeric) {
        (Some(_), Ok(_)) => format!(
            "analytic and numeric profiles; numeric {}",
            if converged { "converged" } else { "non-convergent" }
        ),
        (Some(_), Err(_)) => "analytic profile; numeric unavailable".into(),
        (None, Ok(_)) if converged => "numeric profile converged".into(),
        (None, Ok(_)) => "numeric profile non-convergent".into(),
        (None, Err(e)) => format!("no profile: {e}"),
    };
    Ok(Produced {
        files: vec![
            Artifact {
                name: "limits.csv".into(),
                bytes: csv_bytes(&header, &rows)?,
            },
            Artifact {
                name: "limits_report.json".into(),
                bytes: serde_json::to_vec_pretty(&report)?,
            },
        ],
        passed,
        summary,
        ks: Vec::new(),
        grid: Vec::new(),
    })
}

/// Plateaus `j = 0..=jmax` of `H` with finite left end.
fn plateaus(survival: &StepSurvival, jmax: usize) -> Vec<(usize, ExtReal, ExtReal)> {
    let mut out = Vec::new();
    for j in 0..=jmax {
        let (Some(b), Some(v)) = (survival.breakpoint(j), survival.value(j)) else {
            break;
        };
        if b.is_infinite() {
            break;
        }
        out.push((j, b, v));
    }
    out
}

fn limit_series(survival: &StepSurvival, jmax: usize, x_max: f64) -> Series {
    let ps = plateaus(survival, jmax.max(16));
    let breaks: Vec<f64> = ps.iter().map(|p| p.1.to_f64()).collect();
    let values: Vec<f64> = ps.iter().map(|p| p.2.to_f64()).collect();
    Series::line("H (limit)", "black", step_points(&breaks, &values, x_max))
}

fn cmd_evl(config: &RunConfig, spec: &CfSpec) -> Result<Produced, HarnessError> {
    let (_, survival, grid) = limit_law(config, spec)?;
    let rows: Vec<Vec<String>> = plateaus(&survival, config.jmax)
        .iter()
        .map(|(j, b, v)| vec![j.to_string(), fmt_ext(b), fmt_ext(v), fmt_exact(b), fmt_exact(v)])
        .collect();
    let mut grid_rows = Vec::new();
    for &y in &grid {
        grid_rows.push(vec![y.to_string(), survival.eval_f64(y)?.to_string()]);
    }
    let mut files = vec![
        Artifact {
            name: "evl.csv".into(),
            bytes: csv_bytes(&["j", "breakpoint", "value", "breakpoint_exact", "value_exact"], &rows)?,
        },
        Artifact {
            name: "evl_grid.csv".into(),
            bytes: csv_bytes(&["y", "H"], &grid_rows)?,
        },
    ];
    if config.plot {
        let x_max = grid.last().copied().unwrap_or(8.0) * 1.05;
        let mut series = vec![limit_series(&survival, config.jmax, x_max)];
        if let Some(c) = constant_c(spec) {
            let a = constant_type_alpha(c).to_f64();
            let amp = (a + a * a) / (1.0 + a * a);
            let curve = |scale: f64| -> Vec<(f64, f64)> {
                (0..=200)
                    .map(|i| 1.0 + (x_max - 1.0) * i as f64 / 200.0)
                    .map(|y| (y, (amp / (scale * y)).min(1.05)))
                    .collect()
            };
            series.push(Series::line("v0/y", "#1f77b4", curve(1.0)).dashed());
            series.push(Series::line("v0/(αy)", "#d62728", curve(a)).dashed());
        }
        files.push(Artifact {
            name: "evl.svg".into(),
            bytes: render(&format!("Limiting law for {spec}"), x_max, &series).into_bytes(),
        });
    }
    Ok(Produced {
        files,
        passed: true,
        summary: if survival.is_indicator() {
            "degenerate law: indicator of y < 1".into()
        } else {
            format!("{} plateaus written", rows.len())
        },
        ks: Vec::new(),
        grid,
    })
}

fn cmd_entry_dist(config: &RunConfig, spec: &CfSpec) -> Result<Produced, HarnessError> {
    let ks = config.resolved_k(spec)?;
    let tol = config.tolerances.enclosure_width;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["k", "s", "formula", "formula_width", "oracle", "oracle_width", "agree"])?;
    let (mut rows, mut bad) = (0usize, 0usize);
    for &k in &ks {
        let table = precise_table(spec, k + 2, tol)?;
        let n_max = table.q(k + 1)?;
        let n = u64::try_from(n_max)
            .ok()
            .filter(|&n| n <= oracle_budget())
            .ok_or_else(|| HarnessError::Config(format!("q_{} = {n_max} exceeds the oracle budget", k + 1)))?;
        let alpha_f = table.alpha().to_f64();
        let alpha_w = table.alpha().width_f64();
        let mut sweep = EntrySweep::new(&table, k)?;
        for s in 0..=n {
            let oracle = if s == 0 { sweep.measure() } else { sweep.step()? };
            let formula = entry_cdf_form(&table, k, &BigRational::from_integer(BigInt::from(s)))?;
            // Identical forms share one enclosure of width |coeff|·width(α).
            let (f, fw, o, ow, ok) = if formula == oracle {
                let v = oracle.to_f64(alpha_f);
                let wd = oracle.coeff.to_f64().unwrap_or(f64::INFINITY).abs() * alpha_w;
                (v, wd, v, wd, wd < tol)
            } else {
                let (a, b) = (formula.enclosure(table.alpha()), oracle.enclosure(table.alpha()));
                let ok = a.overlaps(&b) && a.width_f64() < tol && b.width_f64() < tol;
                (a.to_f64(), a.width_f64(), b.to_f64(), b.width_f64(), ok)
            };
            if !ok {
                bad += 1;
            }
            rows += 1;
            w.write_record([
                k.to_string(),
                s.to_string(),
                f.to_string(),
                fw.to_string(),
                o.to_string(),
                ow.to_string(),
                ok.to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| HarnessError::Io(std::io::Error::other(e.to_string())))?;
    Ok(Produced {
        files: vec![Artifact {
            name: "entry_dist.csv".into(),
            bytes,
        }],
        passed: bad == 0,
        summary: format!("{rows} rows, {bad} disagreements"),
        ks,
        grid: Vec::new(),
    })
}

fn cmd_compare(config: &RunConfig, spec: &CfSpec) -> Result<Produced, HarnessError> {
    let (_, survival, grid) = limit_law(config, spec)?;
    let ks = config.resolved_k(spec)?;
    let y_max = grid.last().copied().unwrap_or(1.0);
    let options = SamplingOptions {
        threads: config.threads,
    };
    let mut report = ComparisonReport {
        spec: spec.to_string(),
        seed: config.seed,
        n_samples: config.samples,
        tolerances: config.tolerances.clone(),
        rows: Vec::new(),
        summaries: Vec::new(),
        failed_samples: 0,
        passed: false,
    };
    let mut csv_rows = Vec::new();
    let mut files = Vec::new();
    let limit: Vec<f64> = grid.iter().map(|&y| survival.eval_f64(y)).collect::<Result<_, _>>()?;
    for &k in &ks {
        // H_{q_k}(y) needs q_{m+1} for q_m < q_k y ≤ q_k y_max.
        let bound_q = {
            let t = ConvergentTable::with_precision(spec, k, k + 2)?;
            t.q(k)?.clone() * BigInt::from(y_max.ceil() as u64 + 1)
        };
        let qs = denominators_past(spec, &bound_q)?;
        let depth = (qs.len() + 1).max(k + 2);
        let table = precise_table(spec, depth, config.tolerances.enclosure_width)?;
        let emp = empirical_survival(&table, k, config.samples, config.seed, &grid, &options)?;
        let est = emp.estimates();
        let mut summary = ComparisonSummary {
            k,
            q_k: table.q(k)?.to_string(),
            sup_empirical_finite: 0.0,
            sup_empirical_limit: 0.0,
            sup_finite_limit: 0.0,
            max_enclosure_width: 0.0,
            aborted: emp.aborted,
        };
        let mut finite_pts = Vec::new();
        for (i, &y) in grid.iter().enumerate() {
            let fk = finite_k_survival(&table, k, y)?;
            let row = ComparisonRow {
                k,
                y,
                h_limit: limit[i],
                h_finite_k: fk.to_f64(),
                h_finite_k_width: fk.width_f64(),
                h_empirical: est[i],
                dev_empirical_finite: (est[i] - fk.to_f64()).abs(),
                dev_empirical_limit: (est[i] - limit[i]).abs(),
                dev_finite_limit: (fk.to_f64() - limit[i]).abs(),
            };
            summary.sup_empirical_finite = summary.sup_empirical_finite.max(row.dev_empirical_finite);
            summary.sup_empirical_limit = summary.sup_empirical_limit.max(row.dev_empirical_limit);
            summary.sup_finite_limit = summary.sup_finite_limit.max(row.dev_finite_limit);
            summary.max_enclosure_width = summary.max_enclosure_width.max(row.h_finite_k_width);
            csv_rows.push(vec![
                y.to_string(),
                row.h_limit.to_string(),
                row.h_finite_k.to_string(),
                row.h_empirical.to_string(),
                config.samples.to_string(),
                k.to_string(),
                config.seed.to_string(),
            ]);
            finite_pts.push((y, row.h_finite_k));
            report.rows.push(row);
        }
        if config.plot {
            let x_max = y_max * 1.05;
            let emp_pts: Vec<(f64, f64)> = grid.iter().copied().zip(est.iter().copied()).collect();
            let series = [
                limit_series(&survival, config.jmax, x_max),
                Series::line("H_{q_k} (exact)", "#1f77b4", finite_pts).markers(),
                Series::line("Monte Carlo", "#d62728", emp_pts).dashed(),
            ];
            files.push(Artifact {
                name: format!("compare_k{k}.svg"),
                bytes: render(&format!("{spec}, k = {k}"), x_max, &series).into_bytes(),
            });
        }
        report.summaries.push(summary);
    }
    report.judge();
    let summary = report
        .summaries
        .iter()
        .map(|s| {
            format!(
                "k={}: sup|Ĥ−H_qk|={:.4} sup|Ĥ−H|={:.4} sup|H_qk−H|={:.4} aborted={}",
                s.k, s.sup_empirical_finite, s.sup_empirical_limit, s.sup_finite_limit, s.aborted
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    files.insert(
        0,
        Artifact {
            name: COMPARE_CSV.into(),
            bytes: csv_bytes(
                &["y", "H_limit", "H_finite_k", "H_empirical", "n_samples", "k", "seed"],
                &csv_rows,
            )?,
        },
    );
    files.insert(
        1,
        Artifact {
            name: "compare_report.json".into(),
            bytes: serde_json::to_vec_pretty(&report)?,
        },
    );
    Ok(Produced {
        files,
        passed: report.passed,
        summary,
        ks,
        grid,
    })
}

fn cmd_phi(config: &RunConfig, spec: &CfSpec) -> Result<Produced, HarnessError> {
    let profile = primary_profile(config, spec)?;
    let mut rows = Vec::new();
    let mut all_passed = true;
    for j in 0..config.jmax {
        let (Some(lo), Some(hi)) = (profile.gamma(j), profile.gamma(j + 1)) else {
            break;
        };
        if hi.is_infinite() {
            break;
        }
        let (a, b) = (lo.to_f64(), hi.to_f64());
        if b <= a {
            continue;
        }
        let y = 0.5 * (a + b);
        let r = fixed_point_check(&profile, y)?;
        let knots = phi_y(&profile, r.j)?;
        let (x1, f1) = &knots.knots[1];
        let diagonal = x1 == f1;
        all_passed &= r.passed && diagonal;
        rows.push(vec![
            r.j.to_string(),
            y.to_string(),
            r.g.to_string(),
            r.phi_of_g.to_string(),
            fmt_ext(x1),
            fmt_ext(&knots.knots[2].0),
            r.difference.to_string(),
            r.bound.to_string(),
            r.exact.to_string(),
            r.below_first_knot.to_string(),
            diagonal.to_string(),
            r.passed.to_string(),
        ]);
    }
    let summary = if rows.is_empty() {
        "no plateau with finite right end; nothing to check".to_string()
    } else {
        format!("{} plateaus checked", rows.len())
    };
    Ok(Produced {
        files: vec![Artifact {
            name: "phi.csv".into(),
            bytes: csv_bytes(
                &[
                    "j",
                    "y",
                    "g",
                    "phi_of_g",
                    "knot_x1",
                    "knot_x2",
                    "difference",
                    "bound",
                    "exact",
                    "below_first_knot",
                    "diagonal",
                    "passed",
                ],
                &rows,
            )?,
        }],
        passed: all_passed,
        summary,
        ks: Vec::new(),
        grid: Vec::new(),
    })
}
