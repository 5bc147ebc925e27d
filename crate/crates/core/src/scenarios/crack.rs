//! Scalar crack model: crack measure `a` with conjugate `π_f`, `π̇_f = G`,
//! stability domain `G ≤ G_c` and irreversible growth `ȧ ≥ 0`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{LoadProgram, Observer, Scenario};
use crate::bipotential::{block_bipotential, lift_to_symplectic, separated_bipotential};
use crate::convex::ConvexFunction;
use crate::dynamics::{DissipationLaw, HamiltonianSystem, StepResolver};
use crate::error::{Error, Result};
use crate::sben::StepReduction;

/// Driving force `G(a, ℓ)` with `H = −∫ G da`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrivingForce {
    /// `G = ℓ² a`, increasing in `a`.
    Linear,
    /// `G = ℓ² / a`, decreasing in `a`.
    Inverse,
}

impl DrivingForce {
    pub fn value(self, a: f64, l: f64) -> f64 {
        match self {
            Self::Linear => l * l * a,
            Self::Inverse => l * l / a,
        }
    }

    fn energy(self, a: f64, l: f64) -> f64 {
        match self {
            Self::Linear => -0.5 * l * l * a * a,
            Self::Inverse => -l * l * a.ln(),
        }
    }

    /// `∂²H/∂a²`.
    fn stiffness(self, a: f64, l: f64) -> f64 {
        match self {
            Self::Linear => -l * l,
            Self::Inverse => l * l / (a * a),
        }
    }

    /// Crack measure at which `G(a, ℓ) = G_c`.
    pub fn critical_length(self, l: f64, gc: f64) -> f64 {
        match self {
            Self::Linear => gc / (l * l),
            Self::Inverse => l * l / gc,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrackToyParams {
    pub driving_force: DrivingForce,
    /// `G_c`.
    pub toughness: f64,
    pub a0: f64,
    pub load: LoadProgram,
}

impl CrackToyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.toughness > 0.0 && self.toughness.is_finite()) {
            return Err(Error::InvalidParameter { name: "toughness", reason: format!("must be positive, got {}", self.toughness) });
        }
        let min_a0 = match self.driving_force {
            DrivingForce::Linear => self.a0 >= 0.0,
            DrivingForce::Inverse => self.a0 > 0.0,
        };
        if !(min_a0 && self.a0.is_finite()) {
            return Err(Error::InvalidParameter { name: "a0", reason: format!("driving force undefined at a0 = {}", self.a0) });
        }
        self.load.validate("load")
    }
}

#[derive(Clone, Debug)]
struct Model {
    g: DrivingForce,
    gc: f64,
    load: LoadProgram,
}

struct Reduction(Model);

impl StepReduction for Reduction {
    fn reduced_dim(&self) -> usize {
        1
    }

    fn bounds(&self, t1: f64, z0: &[f64], _: f64) -> Vec<(f64, f64)> {
        let a0 = z0[0];
        let grow = (self.0.g.critical_length(self.0.load.value(t1), self.0.gc) - a0).max(0.0);
        let grow = if grow.is_finite() { grow } else { 0.0 };
        vec![(a0, a0 + 2.0 * grow + 1e-9 * a0.abs().max(1.0))]
    }

    fn assemble(&self, t1: f64, z0: &[f64], dt: f64, r: &[f64]) -> Vec<f64> {
        let g = self.0.g.value(r[0], self.0.load.value(t1));
        vec![r[0], z0[1] + dt * g]
    }

    fn reduce(&self, _: f64, _: &[f64], z1: &[f64], _: f64) -> Vec<f64> {
        vec![z1[0]]
    }

    fn prefer(&self, _: f64, z0: &[f64], _: f64) -> Vec<f64> {
        vec![z0[0]]
    }
}

/// Arrest if `G(a₀) ≤ G_c`, otherwise grow to `G = G_c` when that is reachable.
struct Threshold(Model);

impl StepResolver for Threshold {
    fn resolve(&self, t1: f64, z0: &[f64], dt: f64) -> Result<Vec<f64>> {
        let md = &self.0;
        let l = md.load.value(t1);
        let a0 = z0[0];
        let g0 = md.g.value(a0, l);
        let a1 = if g0 <= md.gc {
            a0
        } else {
            match md.g {
                DrivingForce::Inverse => md.g.critical_length(l, md.gc),
                // G grows with a: no arrested state exists beyond onset
                DrivingForce::Linear => return Err(Error::Inadmissible { step: 0, gap: f64::INFINITY, tol: 0.0 }),
            }
        };
        Ok(vec![a1, z0[1] + dt * md.g.value(a1, l)])
    }
}

struct Readout(Model);

impl Observer for Readout {
    fn columns(&self) -> Vec<String> {
        vec!["a".into(), "G".into(), "load".into()]
    }

    fn observe(&self, t: f64, z: &[f64]) -> Vec<f64> {
        let l = self.0.load.value(t);
        vec![z[0], self.0.g.value(z[0], l), l]
    }
}

pub fn build_crack_toy(p: &CrackToyParams) -> Result<Scenario> {
    p.validate()?;
    let model = Model { g: p.driving_force, gc: p.toughness, load: p.load.clone() };
    let g = p.driving_force;
    let (l1, l2, l3) = (p.load.clone(), p.load.clone(), p.load.clone());
    let sys = HamiltonianSystem::new(1, move |t, z| g.energy(z[0], l1.value(t)), move |t, z| vec![-g.value(z[0], l2.value(t)), 0.0])
        .with_hessian(move |t, z| DMatrix::from_row_slice(2, 2, &[g.stiffness(z[0], l3.value(t)), 0.0, 0.0, 0.0]));
    let b = block_bipotential(
        2,
        vec![
            (0..1, separated_bipotential(ConvexFunction::IndicatorPoint { point: vec![0.0] })?),
            (1..2, separated_bipotential(ConvexFunction::SupportHalfspace { normal: vec![1.0], offset: p.toughness })?),
        ],
    )?;
    Ok(Scenario {
        name: "crack-toy".into(),
        sys,
        law: DissipationLaw::Bipotential(lift_to_symplectic(b)?),
        reduction: Box::new(Reduction(model.clone())),
        resolver: Some(Box::new(Threshold(model.clone()))),
        observer: Box::new(Readout(model)),
        z0: vec![p.a0, 0.0],
    })
}
