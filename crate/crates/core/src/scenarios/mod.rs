//! Lumped mechanical systems: an elastoplastic oscillator, a Coulomb slider
//! and a scalar crack model, each packaged with its dissipation law and step
//! parametrization.

mod crack;
mod oscillator;
mod slider;

pub use crack::{build_crack_toy, CrackToyParams, DrivingForce};
pub use oscillator::{build_elastoplastic_oscillator, build_oscillator_with_flow_rule, DriveKind, OscillatorParams, PlasticFlow};
pub use slider::{build_coulomb_slider, SliderParams};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dynamics::{oracle_trajectory, DissipationLaw, HamiltonianSystem, OracleConfig, StepResolver};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::path::DiscretePath;
use crate::sben::{
    assemble_path, minimize_global, minimize_incremental, residual_profile, GlobalOptions, SbenConfig, SbenProblem, StepReduction,
};

/// Scalar program of time: loads, drives, normal forces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LoadProgram {
    Constant {
        value: f64,
    },
    /// `rate · t`.
    Ramp {
        rate: f64,
    },
    /// `amplitude · sin(π t / duration)` on `[0, duration]`, zero afterwards.
    HalfSine {
        amplitude: f64,
        duration: f64,
    },
    /// Piecewise linear through `(t, value)` points, constant outside.
    Piecewise {
        points: Vec<(f64, f64)>,
    },
}

impl Default for LoadProgram {
    fn default() -> Self {
        Self::Constant { value: 0.0 }
    }
}

impl LoadProgram {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::Ramp { rate } => rate * t,
            Self::HalfSine { amplitude, duration } => {
                if t <= *duration {
                    amplitude * (std::f64::consts::PI * t / duration).sin()
                } else {
                    0.0
                }
            }
            Self::Piecewise { points } => {
                let Some(first) = points.first() else { return 0.0 };
                if t <= first.0 {
                    return first.1;
                }
                for w in points.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t <= t1 {
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                points.last().map_or(0.0, |p| p.1)
            }
        }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter { name, reason });
        match self {
            Self::Constant { value } if !value.is_finite() => bad("non-finite value".into()),
            Self::Ramp { rate } if !rate.is_finite() => bad("non-finite rate".into()),
            Self::HalfSine { amplitude, duration } if !(amplitude.is_finite() && *duration > 0.0) => {
                bad("half-sine needs a finite amplitude and positive duration".into())
            }
            Self::Piecewise { points } => {
                if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
                    return bad("non-finite point".into());
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return bad("times must be strictly increasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Node-wise readout of physical quantities for time series.
pub trait Observer: Send + Sync {
    fn columns(&self) -> Vec<String>;
    fn observe(&self, t: f64, z: &[f64]) -> Vec<f64>;
}

/// A runnable problem: Hamiltonian, law, step parametrization, optional
/// closed-form oracle and a readout.
pub struct Scenario {
    pub name: String,
    pub sys: HamiltonianSystem,
    pub law: DissipationLaw,
    pub reduction: Box<dyn StepReduction>,
    pub resolver: Option<Box<dyn StepResolver>>,
    pub observer: Box<dyn Observer>,
    pub z0: Vec<f64>,
}

impl Scenario {
    pub fn problem(&self) -> SbenProblem<'_> {
        SbenProblem { sys: &self.sys, law: &self.law, reduction: self.reduction.as_ref() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Oracle,
    SbenIncremental,
    SbenGlobal,
}

impl Solver {
    pub const ALL: [Solver; 3] = [Solver::Oracle, Solver::SbenIncremental, Solver::SbenGlobal];

    pub fn name(self) -> &'static str {
        match self {
            Self::Oracle => "oracle",
            Self::SbenIncremental => "sben-incremental",
            Self::SbenGlobal => "sben-global",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub values: Vec<f64>,
    /// `ω(ż_I, ż)·dt` of the step ending here; zero on the initial row.
    pub dissipation: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub scenario: String,
    pub solver: Solver,
    pub columns: Vec<String>,
    pub records: Vec<Record>,
    /// `Π`, the sum of step gaps.
    pub functional: ExtReal,
    pub total_dissipation: f64,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub path: Option<DiscretePath>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.records.iter().map(|r| r.values[i]).collect())
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn cumulative_dissipation(&self) -> Vec<f64> {
        self.records
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r.dissipation;
                Some(*acc)
            })
            .collect()
    }
}

/// Runs `s` on `t_k = k·dt` with the chosen solver.
pub fn run_scenario(s: &Scenario, cfg: &OracleConfig, solver: Solver) -> Result<TimeSeries> {
    run_scenario_with(s, cfg, solver, &GlobalOptions::default())
}

pub fn run_scenario_with(s: &Scenario, cfg: &OracleConfig, solver: Solver, global: &GlobalOptions) -> Result<TimeSeries> {
    cfg.validate()?;
    let started = Instant::now();
    let sben_cfg = SbenConfig::new(cfg.dt, cfg.t_end)?;
    let path = match solver {
        Solver::Oracle => oracle_trajectory(&s.sys, &s.law, s.resolver.as_deref(), &s.z0, cfg)?,
        Solver::SbenIncremental => minimize_incremental(&s.problem(), &s.z0, &sben_cfg)?.path,
        Solver::SbenGlobal => {
            let start = global_start(s, cfg)?;
            minimize_global(&s.problem(), &start, global)?.path
        }
    };
    let mut ts = series_from_path(s, solver, &path)?;
    ts.wall_time_s = started.elapsed().as_secs_f64();
    Ok(ts)
}

/// Starting path for whole-path descent: every step at the centre of its
/// box, or at the tie-break point when the centre path has infinite `Π`.
pub fn global_start(s: &Scenario, cfg: &OracleConfig) -> Result<DiscretePath> {
    let n = cfg.steps();
    let times: Vec<f64> = (0..=n).map(|k| cfg.time(k)).collect();
    let red = s.reduction.as_ref();
    for centre in [true, false] {
        let mut nodes = vec![s.z0.clone()];
        let mut reduced = Vec::with_capacity(n);
        for k in 0..n {
            let (t1, dt) = (times[k + 1], cfg.dt);
            let r = if centre {
                red.bounds(t1, &nodes[k], dt).iter().map(|(a, b)| 0.5 * (a + b)).collect()
            } else {
                red.prefer(t1, &nodes[k], dt)
            };
            nodes.push(red.assemble(t1, &nodes[k], dt, &r));
            reduced.push(r);
        }
        let path = assemble_path(red, &times, &s.z0, &reduced)?;
        let (pi, _) = crate::sben::assemble_functional(&path, &s.law, &s.sys)?;
        if pi.is_finite() {
            return Ok(path);
        }
    }
    Err(Error::InadmissiblePath("no finite starting path for whole-path descent".into()))
}

/// Builds the time series of an admissible path of `s`.
pub fn series_from_path(s: &Scenario, solver: Solver, path: &DiscretePath) -> Result<TimeSeries> {
    let profile = residual_profile(path, &s.law, &s.sys)?;
    let t = path.times();
    let mut records = Vec::with_capacity(path.steps() + 1);
    records.push(Record { t: t[0], values: s.observer.observe(t[0], path.flat(0)), dissipation: 0.0, gap: 0.0 });
    let mut functional = ExtReal::ZERO;
    let mut total = 0.0;
    for (k, r) in profile.iter().enumerate() {
        functional = functional + r.gap;
        total += r.pairing_term;
        records.push(Record {
            t: t[k + 1],
            values: s.observer.observe(t[k + 1], path.flat(k + 1)),
            dissipation: r.pairing_term,
            gap: r.gap.to_f64(),
        });
    }
    Ok(TimeSeries {
        scenario: s.name.clone(),
        solver,
        columns: s.observer.columns(),
        records,
        functional,
        total_dissipation: total,
        wall_time_s: 0.0,
        path: Some(path.clone()),
    })
}

impl LoadProgram {
    /// True when the program never takes a negative value for `t ≥ 0`.
    pub fn is_nonnegative(&self) -> bool {
        match self {
            Self::Constant { value } => *value >= 0.0,
            Self::Ramp { rate } => *rate >= 0.0,
            Self::HalfSine { amplitude, .. } => *amplitude >= 0.0,
            Self::Piecewise { points } => points.iter().all(|(_, v)| *v >= 0.0),
        }
    }
}
