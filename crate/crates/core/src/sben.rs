//! The discrete functional `Π = Σ_k [b̂(ż − X_H, ż) − ω(ż − X_H, ż)]·dt` over
//! admissible paths, with incremental and whole-path minimizers.

use serde::{Deserialize, Serialize};

use crate::bipotential::SymplecticBipotential;
use crate::dynamics::{implicit_euler_hamiltonian, DissipationLaw, HamiltonianSystem, OracleConfig};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::path::DiscretePath;
use crate::search::{minimize_box, SearchOptions};
use crate::symplectic::omega_flat;

/// Components of `ż − X_H` below this fraction of the operands' magnitude
/// (`(‖z₀‖∞+‖z₁‖∞)/dt + ‖X_H‖∞`) are rounding noise and are set to zero.
pub const CANCELLATION_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResidual {
    pub index: usize,
    /// `b̂(ż_I, ż)·dt`.
    pub dissipation_term: ExtReal,
    /// `ω(ż_I, ż)·dt`.
    pub pairing_term: f64,
    /// `dissipation_term − pairing_term`.
    pub gap: ExtReal,
}

/// `(ż, ż_I)` for the step `z_k → z_k1`, with `X_H` taken at `(t_k1, z_k1)`.
pub fn step_velocities(sys: &HamiltonianSystem, z_k: &[f64], z_k1: &[f64], t_k1: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let x_h = sys.x_h_flat(t_k1, z_k1);
    let zdot: Vec<f64> = z_k1.iter().zip(z_k).map(|(b, a)| (b - a) / dt).collect();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = CANCELLATION_RTOL * ((sup(z_k) + sup(z_k1)) / dt + sup(&x_h));
    let zi = (0..zdot.len())
        .map(|j| {
            let d = zdot[j] - x_h[j];
            if d.abs() <= floor {
                0.0
            } else {
                d
            }
        })
        .collect();
    (zdot, zi)
}

pub(crate) fn step_residual_with(
    b: &SymplecticBipotential,
    sys: &HamiltonianSystem,
    index: usize,
    z_k: &[f64],
    z_k1: &[f64],
    t_k: f64,
    t_k1: f64,
) -> Result<StepResidual> {
    let dt = t_k1 - t_k;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter { name: "t_k1", reason: format!("step length {dt} is not positive") });
    }
    let (zdot, zi) = step_velocities(sys, z_k, z_k1, t_k1, dt);
    let dissipation_term = b.eval_flat(&zi, &zdot)?.scale(dt);
    let pairing_term = omega_flat(&zi, &zdot) * dt;
    let gap = dissipation_term.try_sub(ExtReal::finite(pairing_term))?;
    Ok(StepResidual { index, dissipation_term, pairing_term, gap })
}

/// Residual of one step under the right-endpoint rule.
pub fn step_residual(
    law: &DissipationLaw,
    sys: &HamiltonianSystem,
    z_k: &[f64],
    z_k1: &[f64],
    t_k: f64,
    t_k1: f64,
) -> Result<StepResidual> {
    step_residual_with(&law.to_bipotential()?, sys, 0, z_k, z_k1, t_k, t_k1)
}

/// `ω(ż − X_H, ż)` evaluated directly and through `−ω(ż_I, ż) = ω(X_H, ż)`.
pub fn pairing_both_ways(zdot: &[f64], x_h: &[f64]) -> (f64, f64) {
    let zi: Vec<f64> = zdot.iter().zip(x_h).map(|(a, b)| a - b).collect();
    (omega_flat(&zi, zdot), -omega_flat(x_h, zdot))
}

/// `Π` and the per-step residuals; `Π = +∞` when any step is inadmissible.
pub fn assemble_functional(path: &DiscretePath, law: &DissipationLaw, sys: &HamiltonianSystem) -> Result<(ExtReal, Vec<StepResidual>)> {
    let profile = residual_profile(path, law, sys)?;
    let total = profile.iter().fold(ExtReal::ZERO, |acc, r| acc + r.gap);
    Ok((total, profile))
}

pub fn residual_profile(path: &DiscretePath, law: &DissipationLaw, sys: &HamiltonianSystem) -> Result<Vec<StepResidual>> {
    if path.phase_dim() != sys.phase_dim() {
        return Err(Error::DimensionMismatch { expected: sys.phase_dim(), got: path.phase_dim() });
    }
    let b = law.to_bipotential()?;
    let t = path.times();
    (0..path.steps()).map(|k| step_residual_with(&b, sys, k, path.flat(k), path.flat(k + 1), t[k], t[k + 1])).collect()
}

/// Parametrization of the admissible increments of one step by a small
/// vector of reduced unknowns, with the equality constraints eliminated.
pub trait StepReduction: Send + Sync {
    fn reduced_dim(&self) -> usize;

    /// Box for the reduced unknowns at this step.
    fn bounds(&self, t1: f64, z0: &[f64], dt: f64) -> Vec<(f64, f64)>;

    /// The end node `z₁` for reduced unknowns `r`.
    fn assemble(&self, t1: f64, z0: &[f64], dt: f64, r: &[f64]) -> Vec<f64>;

    /// Reduced unknowns of an admissible step; inverse of [`Self::assemble`].
    fn reduce(&self, t1: f64, z0: &[f64], z1: &[f64], dt: f64) -> Vec<f64>;

    /// Reduced unknowns of the smallest increment, used to break ties.
    fn prefer(&self, t1: f64, z0: &[f64], dt: f64) -> Vec<f64>;

    /// Distance from `z₁` to the admissible set of the step.
    fn constraint_residual(&self, t1: f64, z0: &[f64], z1: &[f64], dt: f64) -> f64 {
        let r = self.reduce(t1, z0, z1, dt);
        crate::vector::max_abs(&crate::vector::sub(&self.assemble(t1, z0, dt, &r), z1))
    }
}

/// Reduction for `ż_I = 0`: the only admissible increment is the implicit-Euler step.
pub struct ReversibleReduction<'a> {
    pub sys: &'a HamiltonianSystem,
    pub cfg: OracleConfig,
}

impl StepReduction for ReversibleReduction<'_> {
    fn reduced_dim(&self) -> usize {
        0
    }

    fn bounds(&self, _: f64, _: &[f64], _: f64) -> Vec<(f64, f64)> {
        Vec::new()
    }

    fn assemble(&self, t1: f64, z0: &[f64], dt: f64, _: &[f64]) -> Vec<f64> {
        implicit_euler_hamiltonian(self.sys, t1, z0, dt, &self.cfg).expect("implicit Euler step")
    }

    fn reduce(&self, _: f64, _: &[f64], _: &[f64], _: f64) -> Vec<f64> {
        Vec::new()
    }

    fn prefer(&self, _: f64, _: &[f64], _: f64) -> Vec<f64> {
        Vec::new()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbenConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scan: Option<usize>,
    /// Accept the reduction's preferred point outright when its gap is zero.
    #[serde(default = "yes")]
    pub certify_trial: bool,
}

fn yes() -> bool {
    true
}

impl SbenConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        OracleConfig::new(dt, t_end)?;
        Ok(Self { dt, t_end, scan: None, certify_trial: true })
    }

    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }

    fn search(&self) -> SearchOptions {
        let mut o = SearchOptions::default();
        if let Some(s) = self.scan {
            o.scan = s.max(3);
        }
        o
    }
}

/// A dynamical system, its dissipation law and the step parametrization.
pub struct SbenProblem<'a> {
    pub sys: &'a HamiltonianSystem,
    pub law: &'a DissipationLaw,
    pub reduction: &'a dyn StepReduction,
}

#[derive(Clone, Debug)]
pub struct IncrementalSolution {
    pub path: DiscretePath,
    pub reduced: Vec<Vec<f64>>,
    pub residuals: Vec<StepResidual>,
    pub total: ExtReal,
}

struct StepMin {
    r: Vec<f64>,
    z1: Vec<f64>,
    residual: StepResidual,
}

#[allow(clippy::too_many_arguments)]
fn minimize_step(
    p: &SbenProblem,
    b: &SymplecticBipotential,
    opts: &SearchOptions,
    certify: bool,
    k: usize,
    t0: f64,
    t1: f64,
    z0: &[f64],
) -> Result<StepMin> {
    let dt = t1 - t0;
    let bounds = p.reduction.bounds(t1, z0, dt);
    let prefer = p.reduction.prefer(t1, z0, dt);
    let objective = |r: &[f64]| {
        let z1 = p.reduction.assemble(t1, z0, dt, r);
        step_residual_with(b, p.sys, k, z0, &z1, t0, t1).map_or(ExtReal::PosInf, |s| s.gap)
    };
    // gaps are nonnegative, so a zero gap at the smallest increment is a global minimizer
    let (r, _) = match objective(&prefer) {
        ExtReal::Finite(g) if certify && g <= 0.0 => (prefer, ExtReal::Finite(g)),
        _ => minimize_box(objective, &bounds, &prefer, opts),
    };
    let z1 = p.reduction.assemble(t1, z0, dt, &r);
    let residual = step_residual_with(b, p.sys, k, z0, &z1, t0, t1)?;
    Ok(StepMin { r, z1, residual })
}

/// Step-by-step minimization of the functional on `t_k = k·dt`.
pub fn minimize_incremental(p: &SbenProblem, z0: &[f64], cfg: &SbenConfig) -> Result<IncrementalSolution> {
    OracleConfig::new(cfg.dt, cfg.t_end)?;
    if z0.len() != p.sys.phase_dim() {
        return Err(Error::DimensionMismatch { expected: p.sys.phase_dim(), got: z0.len() });
    }
    let b = p.law.to_bipotential()?;
    let opts = cfg.search();
    let n = cfg.steps();
    let mut nodes = vec![z0.to_vec()];
    let mut reduced = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    let mut total = ExtReal::ZERO;
    let mut trace = Vec::new();
    for k in 0..n {
        let (t0, t1) = (k as f64 * cfg.dt, (k + 1) as f64 * cfg.dt);
        let m = minimize_step(p, &b, &opts, cfg.certify_trial, k, t0, t1, &nodes[k])?;
        trace.push(m.residual.gap.to_f64());
        if !m.residual.gap.is_finite() {
            trace.drain(..trace.len().saturating_sub(8));
            return Err(Error::NonConvergence { step: k, trace });
        }
        total = total + m.residual.gap;
        nodes.push(m.z1);
        reduced.push(m.r);
        residuals.push(m.residual);
    }
    Ok(IncrementalSolution { path: DiscretePath::uniform(cfg.dt, nodes)?, reduced, residuals, total })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalOptions {
    pub sweeps: usize,
    /// Stop once a sweep lowers `Π` by less than this fraction.
    pub rel_decrease: f64,
    /// Fall back to a full block line search on `Π` when the local proposal is rejected.
    pub exact_blocks: bool,
    /// Steps per block; the proposal solves them one after another.
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    4
}

impl Default for GlobalOptions {
    fn default() -> Self {
        Self { sweeps: 50, rel_decrease: 1e-10, exact_blocks: false, window: default_window() }
    }
}

#[derive(Clone, Debug)]
pub struct GlobalSolution {
    pub path: DiscretePath,
    pub reduced: Vec<Vec<f64>>,
    /// `Π` before the first sweep and after each sweep.
    pub history: Vec<f64>,
    /// Proposals rejected because they made `Π` infinite.
    pub reverted_blocks: usize,
}

struct Tail<'a> {
    p: &'a SbenProblem<'a>,
    b: SymplecticBipotential,
    times: Vec<f64>,
}

impl Tail<'_> {
    /// Rebuilds nodes `k+1..` from node `k` and the reduced unknowns; returns
    /// the functional of the rebuilt tail.
    fn rebuild(&self, nodes: &mut [Vec<f64>], reduced: &[Vec<f64>], from: usize, gaps: &mut [ExtReal]) -> ExtReal {
        for k in from..reduced.len() {
            let (t0, t1) = (self.times[k], self.times[k + 1]);
            let z1 = self.p.reduction.assemble(t1, &nodes[k], t1 - t0, &reduced[k]);
            gaps[k] = step_residual_with(&self.b, self.p.sys, k, &nodes[k], &z1, t0, t1).map_or(ExtReal::PosInf, |s| s.gap);
            nodes[k + 1] = z1;
        }
        gaps.iter().fold(ExtReal::ZERO, |a, g| a + *g)
    }
}

/// Block-coordinate descent on `Π` over whole paths.
///
/// Each block is the reduced unknowns of `window` consecutive steps; later
/// steps keep their reduced unknowns and are rebuilt. A proposal (the local
/// argmins of the block's steps, taken in order from the current node) is
/// kept only when `Π` decreases. Single-step blocks stall on the elastoplastic
/// oscillator because every step moves the whole tail.
pub fn minimize_global(p: &SbenProblem, path0: &DiscretePath, opts: &GlobalOptions) -> Result<GlobalSolution> {
    let times = path0.times().to_vec();
    let n = path0.steps();
    let mut nodes: Vec<Vec<f64>> = path0.nodes().to_vec();
    let mut reduced = Vec::with_capacity(n);
    for k in 0..n {
        let dt = times[k + 1] - times[k];
        let r = p.reduction.reduce(times[k + 1], &nodes[k], &nodes[k + 1], dt);
        let dev = p.reduction.constraint_residual(times[k + 1], &nodes[k], &nodes[k + 1], dt);
        if dev > 1e-9 * (1.0 + crate::vector::max_abs(&nodes[k + 1])) {
            return Err(Error::InadmissiblePath(format!("step {k} violates the step constraints by {dev:e}")));
        }
        reduced.push(r);
    }
    let tail = Tail { p, b: p.law.to_bipotential()?, times: times.clone() };
    let mut gaps = vec![ExtReal::ZERO; n];
    let mut pi = tail.rebuild(&mut nodes, &reduced, 0, &mut gaps);
    if !pi.is_finite() {
        return Err(Error::InadmissiblePath("starting path has infinite functional".into()));
    }
    let search = SearchOptions::default();
    let mut history = vec![pi.to_f64()];
    let mut reverted = 0;
    for _ in 0..opts.sweeps {
        let start = pi.to_f64();
        for k in 0..n {
            let mut cand_nodes = nodes.clone();
            let mut cand_r = reduced.clone();
            let mut cand_gaps = gaps.clone();
            for j in k..(k + opts.window.max(1)).min(n) {
                let m = minimize_step(p, &tail.b, &search, true, j, times[j], times[j + 1], &cand_nodes[j])?;
                cand_r[j] = m.r;
                cand_nodes[j + 1] = m.z1;
            }
            let mut cand_pi = tail.rebuild(&mut cand_nodes, &cand_r, k, &mut cand_gaps);
            if !cand_pi.is_finite() {
                reverted += 1;
            }
            if !(cand_pi < pi) && opts.exact_blocks {
                let dt = times[k + 1] - times[k];
                let bounds = p.reduction.bounds(times[k + 1], &nodes[k], dt);
                let mut scratch_nodes = nodes.clone();
                let mut scratch_gaps = gaps.clone();
                let mut scratch_r = reduced.clone();
                let (r, v) = minimize_box(
                    |r| {
                        scratch_r[k] = r.to_vec();
                        tail.rebuild(&mut scratch_nodes, &scratch_r, k, &mut scratch_gaps)
                    },
                    &bounds,
                    &reduced[k],
                    &search,
                );
                if v < pi {
                    cand_r[k] = r;
                    cand_nodes = nodes.clone();
                    cand_pi = tail.rebuild(&mut cand_nodes, &cand_r, k, &mut cand_gaps);
                }
            }
            if cand_pi < pi {
                nodes = cand_nodes;
                reduced = cand_r;
                gaps = cand_gaps;
                pi = cand_pi;
            }
        }
        let now = pi.to_f64();
        history.push(now);
        if start - now <= opts.rel_decrease * start.abs() {
            break;
        }
    }
    Ok(GlobalSolution { path: DiscretePath::new(times, nodes)?, reduced, history, reverted_blocks: reverted })
}

/// Reduced unknowns of every step of an admissible path.
pub fn reduce_path(reduction: &dyn StepReduction, path: &DiscretePath) -> Vec<Vec<f64>> {
    let t = path.times();
    (0..path.steps()).map(|k| reduction.reduce(t[k + 1], path.flat(k), path.flat(k + 1), t[k + 1] - t[k])).collect()
}

/// Path assembled from `z0` and per-step reduced unknowns.
pub fn assemble_path(reduction: &dyn StepReduction, times: &[f64], z0: &[f64], reduced: &[Vec<f64>]) -> Result<DiscretePath> {
    let mut nodes = vec![z0.to_vec()];
    for (k, r) in reduced.iter().enumerate() {
        let z1 = reduction.assemble(times[k + 1], &nodes[k], times[k + 1] - times[k], r);
        nodes.push(z1);
    }
    DiscretePath::new(times.to_vec(), nodes)
}
