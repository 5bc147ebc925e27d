//! Mass tethered by a spring to a massless shoe on a moving belt, with
//! Coulomb friction between shoe and belt.
//!
//! Positions `x = (u, c_t, c_n)`, momenta `y = (p, π_t, π_n)`. The spring
//! stretches by `u + c_t − d(t)`, `c = −[u]` is the contact jump with the
//! sign of the friction law's velocity argument, and `π̇ = (t_t, t_n)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{LoadProgram, Observer, Scenario};
use crate::bipotential::{block_bipotential, coulomb_bipotential, lift_to_symplectic, separated_bipotential};
use crate::convex::ConvexFunction;
use crate::dynamics::{DissipationLaw, HamiltonianSystem, StepResolver};
use crate::error::{Error, Result};
use crate::sben::StepReduction;
use crate::vector::norm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliderParams {
    pub mass: f64,
    /// Spring stiffness per tangential direction.
    pub stiffness: [f64; 2],
    pub normal_force: LoadProgram,
    pub mu: f64,
    /// Belt displacement along `drive_direction`.
    pub drive: LoadProgram,
    #[serde(default = "default_direction")]
    pub drive_direction: [f64; 2],
}

fn default_direction() -> [f64; 2] {
    [1.0, 0.0]
}

impl SliderParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter { name: "mass", reason: format!("must be positive, got {}", self.mass) });
        }
        if !self.stiffness.iter().all(|k| *k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter { name: "stiffness", reason: "components must be positive".into() });
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParameter { name: "mu", reason: format!("must be positive, got {}", self.mu) });
        }
        if !self.drive_direction.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter { name: "drive_direction", reason: "must be finite".into() });
        }
        self.normal_force.validate("normal_force")?;
        self.drive.validate("drive")?;
        if !self.normal_force.is_nonnegative() {
            return Err(Error::InvalidParameter { name: "normal_force", reason: "t_n(t) must stay nonnegative".into() });
        }
        Ok(())
    }
}

const U: usize = 0;
const C: usize = 2;
const CN: usize = 4;
const P: usize = 5;
const PI: usize = 7;
const PIN: usize = 9;

#[derive(Clone, Debug)]
struct Model {
    m: f64,
    k: [f64; 2],
    mu: f64,
    tn: LoadProgram,
    drive: LoadProgram,
    dir: [f64; 2],
}

impl Model {
    fn belt(&self, t: f64) -> [f64; 2] {
        let d = self.drive.value(t);
        [d * self.dir[0], d * self.dir[1]]
    }

    fn normal(&self, t: f64) -> f64 {
        self.tn.value(t).max(0.0)
    }

    /// Reaction that keeps the contact stuck over the step.
    fn trial(&self, t1: f64, z0: &[f64], dt: f64) -> [f64; 2] {
        let d1 = self.belt(t1);
        let mut t = [0.0; 2];
        for i in 0..2 {
            let pred = z0[U + i] + dt * z0[P + i] / self.m + z0[C + i] - d1[i];
            t[i] = -self.k[i] * pred / (1.0 + self.k[i] * dt * dt / self.m);
        }
        t
    }

    /// Slip per unit reaction deficit, `Δc_i = α_i (trial_i − t_i)`.
    fn compliance(&self, dt: f64) -> [f64; 2] {
        [1.0 / self.k[0] + dt * dt / self.m, 1.0 / self.k[1] + dt * dt / self.m]
    }

    fn assemble(&self, t1: f64, z0: &[f64], dt: f64, tt: &[f64]) -> Vec<f64> {
        let d1 = self.belt(t1);
        let mut z1 = z0.to_vec();
        for i in 0..2 {
            let p1 = z0[P + i] + dt * tt[i];
            let u1 = z0[U + i] + dt * p1 / self.m;
            z1[P + i] = p1;
            z1[U + i] = u1;
            z1[C + i] = d1[i] - u1 - tt[i] / self.k[i];
            z1[PI + i] = z0[PI + i] + dt * tt[i];
        }
        z1[PIN] = z0[PIN] + dt * self.normal(t1);
        z1
    }

    fn reaction(&self, t: f64, z: &[f64]) -> [f64; 2] {
        let d = self.belt(t);
        [-self.k[0] * (z[U] + z[C] - d[0]), -self.k[1] * (z[U + 1] + z[C + 1] - d[1])]
    }
}

struct Reduction(Model);

impl StepReduction for Reduction {
    fn reduced_dim(&self) -> usize {
        2
    }

    fn bounds(&self, t1: f64, _: &[f64], _: f64) -> Vec<(f64, f64)> {
        let r = self.0.mu * self.0.normal(t1);
        vec![(-r, r); 2]
    }

    fn assemble(&self, t1: f64, z0: &[f64], dt: f64, r: &[f64]) -> Vec<f64> {
        self.0.assemble(t1, z0, dt, r)
    }

    fn reduce(&self, t1: f64, _: &[f64], z1: &[f64], _: f64) -> Vec<f64> {
        self.0.reaction(t1, z1).to_vec()
    }

    fn prefer(&self, t1: f64, z0: &[f64], dt: f64) -> Vec<f64> {
        let r = self.0.mu * self.0.normal(t1);
        self.0.trial(t1, z0, dt).iter().map(|t| t.clamp(-r, r)).collect()
    }
}

/// Stick trial, then return to the cone along the slip direction.
struct TrialStateFriction(Model);

impl StepResolver for TrialStateFriction {
    fn resolve(&self, t1: f64, z0: &[f64], dt: f64) -> Result<Vec<f64>> {
        let md = &self.0;
        let tr = md.trial(t1, z0, dt);
        let radius = md.mu * md.normal(t1);
        if norm(&tr) <= radius {
            return Ok(md.assemble(t1, z0, dt, &tr));
        }
        // t_i = α_i tr_i / (α_i + λ) with ‖t‖ = μ t_n; ‖t(λ)‖ decreases in λ
        let a = md.compliance(dt);
        let at = |l: f64| [a[0] * tr[0] / (a[0] + l), a[1] * tr[1] / (a[1] + l)];
        let (mut lo, mut hi) = (0.0, a[0].max(a[1]));
        while norm(&at(hi)) > radius {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::NonConvergence { step: 0, trace: vec![norm(&tr), radius] });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm(&at(mid)) > radius {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(md.assemble(t1, z0, dt, &at(hi)))
    }
}

struct Readout(Model);

impl Observer for Readout {
    fn columns(&self) -> Vec<String> {
        ["u_1", "u_2", "slip_1", "slip_2", "t_t1", "t_t2", "t_n"].iter().map(|s| s.to_string()).collect()
    }

    fn observe(&self, t: f64, z: &[f64]) -> Vec<f64> {
        let r = self.0.reaction(t, z);
        vec![z[U], z[U + 1], -z[C], -z[C + 1], r[0], r[1], self.0.normal(t)]
    }
}

pub fn build_coulomb_slider(p: &SliderParams) -> Result<Scenario> {
    p.validate()?;
    let model = Model { m: p.mass, k: p.stiffness, mu: p.mu, tn: p.normal_force.clone(), drive: p.drive.clone(), dir: p.drive_direction };
    let (mass, k) = (p.mass, p.stiffness);
    let (h_model, g_model) = (model.clone(), model.clone());
    let h = move |t: f64, z: &[f64]| {
        let d = h_model.belt(t);
        let mut e = -h_model.normal(t) * z[CN];
        for i in 0..2 {
            e += z[P + i] * z[P + i] / (2.0 * mass) + 0.5 * k[i] * (z[U + i] + z[C + i] - d[i]).powi(2);
        }
        e
    };
    let grad = move |t: f64, z: &[f64]| {
        let d = g_model.belt(t);
        let mut g = vec![0.0; 10];
        for i in 0..2 {
            let s = k[i] * (z[U + i] + z[C + i] - d[i]);
            g[U + i] = s;
            g[C + i] = s;
            g[P + i] = z[P + i] / mass;
        }
        g[CN] = -g_model.normal(t);
        g
    };
    let sys = HamiltonianSystem::new(5, h, grad).with_hessian(move |_, _| {
        let mut q = DMatrix::zeros(10, 10);
        for i in 0..2 {
            for (a, b) in [(U + i, U + i), (U + i, C + i), (C + i, U + i), (C + i, C + i)] {
                q[(a, b)] = k[i];
            }
            q[(P + i, P + i)] = 1.0 / mass;
        }
        q
    });
    let b = block_bipotential(
        10,
        vec![(0..7, separated_bipotential(ConvexFunction::IndicatorPoint { point: vec![0.0; 7] })?), (7..10, coulomb_bipotential(p.mu)?)],
    )?;
    Ok(Scenario {
        name: "coulomb-slider".into(),
        sys,
        law: DissipationLaw::Bipotential(lift_to_symplectic(b)?),
        reduction: Box::new(Reduction(model.clone())),
        resolver: Some(Box::new(TrialStateFriction(model.clone()))),
        observer: Box::new(Readout(model)),
        z0: vec![0.0; 10],
    })
}
