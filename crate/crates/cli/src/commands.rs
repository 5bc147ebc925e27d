use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use sben_core::bipotential::{axiom_audit, bipotential_gap, BoxSampler};
use sben_core::dynamics::OracleConfig;
use sben_core::sben::{residual_profile, step_velocities};
use sben_core::scenarios::{run_scenario_with, Scenario, Solver, TimeSeries};
use sben_core::symplectic::{j_power_flat, omega_flat};
use sben_core::ExtReal;

use crate::config::{Format, RunConfig};
use crate::error::CliError;
use crate::output::{write_json, write_profile_csv, write_series_csv};

/// Environment variable naming the directory all outputs go under.
pub const OUTPUT_ROOT_VAR: &str = "SBEN_OUTPUT_ROOT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub solver: Solver,
    pub dt: f64,
    pub t_end: f64,
    pub steps: usize,
    pub seed: u64,
    pub status: String,
    /// `Π`.
    pub functional: Option<ExtReal>,
    pub total_dissipation: Option<f64>,
    pub wall_time_s: f64,
    /// Set when the solver stopped early; the other artifacts are then missing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn prepare_dir(root: &Path, name: &str) -> Result<PathBuf, CliError> {
    let dir = root.join(name);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn build(cfg: &RunConfig) -> Result<Scenario, CliError> {
    cfg.scenario.build().map_err(|e| CliError::Solver(e.to_string()))
}

fn solve(cfg: &RunConfig, s: &Scenario, solver: Solver) -> sben_core::Result<TimeSeries> {
    run_scenario_with(s, &cfg.oracle_config(), solver, &cfg.solver.global)
}

fn write_series(dir: &Path, stem: &str, cfg: &RunConfig, ts: &TimeSeries) -> Result<(), CliError> {
    for f in &cfg.output.formats {
        match f {
            Format::Csv => write_series_csv(&dir.join(format!("{stem}.csv")), ts)?,
            Format::Json => write_json(&dir.join(format!("{stem}.json")), ts)?,
        }
    }
    Ok(())
}

/// Runs the configured solver and writes `series`, `profile` and `summary.json`.
pub fn run(cfg: &RunConfig, root: &Path) -> Result<Summary, CliError> {
    let dir = prepare_dir(root, &cfg.out_dir_name())?;
    let s = build(cfg)?;
    let started = std::time::Instant::now();
    let result = solve(cfg, &s, cfg.solver.name);
    let mut summary = Summary {
        scenario: s.name.clone(),
        solver: cfg.solver.name,
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        steps: cfg.oracle_config().steps(),
        seed: cfg.seed,
        status: "ok".into(),
        functional: None,
        total_dissipation: None,
        wall_time_s: 0.0,
        error: None,
    };
    let ts = match result {
        Ok(ts) => ts,
        Err(e) => {
            summary.status = "failed".into();
            summary.error = Some(e.to_string());
            summary.wall_time_s = started.elapsed().as_secs_f64();
            write_json(&dir.join("summary.json"), &summary)?;
            return Err(CliError::Solver(e.to_string()));
        }
    };
    write_series(&dir, "series", cfg, &ts)?;
    if cfg.output.profile {
        let path = ts.path.as_ref().expect("solver keeps its path");
        let profile = residual_profile(path, &s.law, &s.sys).map_err(|e| CliError::Solver(e.to_string()))?;
        write_profile_csv(&dir.join("profile.csv"), path.times(), &profile)?;
    }
    summary.functional = Some(ts.functional);
    summary.total_dissipation = Some(ts.total_dissipation);
    summary.wall_time_s = ts.wall_time_s;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub solver: Solver,
    pub against: Solver,
    /// Largest absolute difference per observer column.
    pub max_deviation: BTreeMap<String, f64>,
    pub max_deviation_overall: f64,
}

/// Runs the configured solver and a reference solver on the same grid.
pub fn compare(cfg: &RunConfig, against: Solver, root: &Path) -> Result<Comparison, CliError> {
    let dir = prepare_dir(root, &cfg.out_dir_name())?;
    let s = build(cfg)?;
    let a = solve(cfg, &s, cfg.solver.name).map_err(|e| CliError::Solver(e.to_string()))?;
    let b = solve(cfg, &s, against).map_err(|e| CliError::Solver(format!("{}: {e}", against.name())))?;
    write_series(&dir, "series", cfg, &a)?;
    write_series(&dir, against.name(), cfg, &b)?;
    let mut max_deviation = BTreeMap::new();
    for (i, c) in a.columns.iter().enumerate() {
        let d = a.records.iter().zip(&b.records).fold(0.0f64, |m, (x, y)| m.max((x.values[i] - y.values[i]).abs()));
        max_deviation.insert(c.clone(), d);
    }
    let overall = max_deviation.values().fold(0.0f64, |m, v| m.max(*v));
    let cmp = Comparison { solver: cfg.solver.name, against, max_deviation, max_deviation_overall: overall };
    write_json(&dir.join("comparison.json"), &cmp)?;
    Ok(cmp)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub dt: f64,
    pub steps: usize,
    pub functional: ExtReal,
    pub total_dissipation: f64,
    /// Observer readout at `t_end`.
    pub final_values: Vec<f64>,
}

/// Repeats the run for each time step; writes `sweep.csv`.
pub fn sweep(cfg: &RunConfig, dts: &[f64], root: &Path) -> Result<Vec<SweepRow>, CliError> {
    let dir = prepare_dir(root, &cfg.out_dir_name())?;
    let s = build(cfg)?;
    let mut rows = Vec::new();
    let mut columns = Vec::new();
    for &dt in dts {
        let oc = OracleConfig::new(dt, cfg.time.t_end)
            .map_err(|e| CliError::Config(crate::ConfigError { message: format!("--dt-list: {e}"), line: None }))?;
        let ts =
            run_scenario_with(&s, &oc, cfg.solver.name, &cfg.solver.global).map_err(|e| CliError::Solver(format!("dt = {dt}: {e}")))?;
        columns = ts.columns.clone();
        rows.push(SweepRow {
            dt,
            steps: oc.steps(),
            functional: ts.functional,
            total_dissipation: ts.total_dissipation,
            final_values: ts.records.last().map(|r| r.values.clone()).unwrap_or_default(),
        });
    }
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    let mut header: Vec<String> = ["dt", "steps", "functional", "total_dissipation"].iter().map(|s| s.to_string()).collect();
    header.extend(columns.iter().map(|c| format!("{c}_final")));
    w.write_record(&header)?;
    for r in &rows {
        let mut row = vec![
            crate::output::num(r.dt),
            r.steps.to_string(),
            crate::output::num(r.functional.to_f64()),
            crate::output::num(r.total_dissipation),
        ];
        row.extend(r.final_values.iter().map(|v| crate::output::num(*v)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    pub finite_samples: usize,
    /// Smallest margin (inequality audits) or largest deviation (identity audits).
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub scenario: String,
    pub law: String,
    pub seed: u64,
    pub passed: bool,
    pub audits: Vec<AuditEntry>,
}

const AUDIT_SAMPLES: usize = 4000;
const AUDIT_TOL: f64 = 1e-9;

/// Fenchel-inequality, lift-identity and axiom audits of the scenario's law.
///
/// Samples are the step velocity pairs `(ż_I, ż)` of an incremental run plus
/// seeded random perturbations of them, so constraint slots are visited with
/// finite values.
pub fn audit(cfg: &RunConfig, root: &Path) -> Result<AuditReport, CliError> {
    let dir = prepare_dir(root, &cfg.out_dir_name())?;
    let s = build(cfg)?;
    let b = s.law.to_bipotential().map_err(|e| CliError::Solver(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::new();
    if let Ok(ts) = solve(cfg, &s, Solver::SbenIncremental) {
        let path = ts.path.expect("solver keeps its path");
        for k in 0..path.steps() {
            let dt = path.times()[k + 1] - path.times()[k];
            let (zdot, zi) = step_velocities(&s.sys, path.flat(k), path.flat(k + 1), path.times()[k + 1], dt);
            pairs.push((zi, zdot));
        }
    }
    let n = s.sys.phase_dim();
    while pairs.len() < AUDIT_SAMPLES {
        let (zi, z) = if pairs.is_empty() || rng.gen_bool(0.5) {
            ((0..n).map(|_| rng.gen_range(-3.0..3.0)).collect(), (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect())
        } else {
            let (a, c) = pairs[rng.gen_range(0..pairs.len())].clone();
            let j = rng.gen_range(0..n);
            let mut a: Vec<f64> = a;
            let mut c: Vec<f64> = c;
            if rng.gen_bool(0.5) {
                a[j] += rng.gen_range(-1.0..1.0);
            } else {
                c[j] += rng.gen_range(-1.0..1.0);
            }
            (a, c)
        };
        pairs.push((zi, z));
    }
    pairs.truncate(AUDIT_SAMPLES);

    let mut fenchel = AuditEntry {
        name: "fenchel-inequality".into(),
        passed: true,
        samples: pairs.len(),
        finite_samples: 0,
        value: f64::INFINITY,
        tolerance: AUDIT_TOL,
    };
    let mut lift =
        AuditEntry { name: "lift-identity".into(), passed: true, samples: pairs.len(), finite_samples: 0, value: 0.0, tolerance: 1e-12 };
    for (zi, z) in &pairs {
        let v = b.eval_flat(zi, z).map_err(|e| CliError::Solver(e.to_string()))?;
        if let ExtReal::Finite(v) = v {
            fenchel.finite_samples += 1;
            fenchel.value = fenchel.value.min(v - omega_flat(zi, z));
        }
        if let Some(src) = b.source() {
            let lifted = b.gap_flat(zi, z).map_err(|e| CliError::Solver(e.to_string()))?;
            let direct = bipotential_gap(src, &j_power_flat(zi, 3), z).map_err(|e| CliError::Solver(e.to_string()))?;
            let dev = match (lifted, direct) {
                (ExtReal::Finite(a), ExtReal::Finite(c)) => {
                    lift.finite_samples += 1;
                    (a - c).abs() / (1.0 + c.abs())
                }
                (ExtReal::PosInf, ExtReal::PosInf) => 0.0,
                _ => f64::INFINITY,
            };
            lift.value = lift.value.max(dev);
        }
    }
    fenchel.passed = fenchel.value >= -AUDIT_TOL;
    lift.passed = lift.value <= lift.tolerance;
    let mut audits = vec![fenchel, lift];
    if let Some(src) = b.source() {
        let r = axiom_audit(src, &BoxSampler { half_width: 3.0, seed: cfg.seed }, AUDIT_SAMPLES);
        audits.push(AuditEntry {
            name: "axiom-cross-inequality".into(),
            // NaN: no finite samples, nothing violated
            passed: r.min_cross_margin.is_nan() || r.min_cross_margin >= -AUDIT_TOL,
            samples: r.samples,
            finite_samples: r.finite_samples,
            value: r.min_cross_margin,
            tolerance: AUDIT_TOL,
        });
        audits.push(AuditEntry {
            name: "axiom-convexity".into(),
            passed: r.worst_convexity_violation <= AUDIT_TOL,
            samples: r.samples,
            finite_samples: r.finite_samples,
            value: r.worst_convexity_violation,
            tolerance: AUDIT_TOL,
        });
    }
    let report =
        AuditReport { scenario: s.name.clone(), law: format!("{:?}", b), seed: cfg.seed, passed: audits.iter().all(|a| a.passed), audits };
    write_json(&dir.join("audit.json"), &report)?;
    Ok(report)
}

/// Runs independent configs on up to `jobs` threads. Configs sharing an
/// output directory get an index suffix so runs never write to the same place.
pub fn run_batch(cfgs: &[RunConfig], jobs: usize, root: &Path) -> Vec<Result<Summary, CliError>> {
    let mut cfgs = cfgs.to_vec();
    let mut used = std::collections::BTreeSet::new();
    for (i, c) in cfgs.iter_mut().enumerate() {
        let name = c.out_dir_name();
        if !used.insert(name.clone()) {
            let unique = format!("{name}-{i}");
            used.insert(unique.clone());
            c.output.dir = Some(unique);
        }
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Summary, CliError>>>> = Mutex::new((0..cfgs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, cfgs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= cfgs.len() {
                    break;
                }
                let r = run(&cfgs[i], root);
                results.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    results.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every config ran")).collect()
}
