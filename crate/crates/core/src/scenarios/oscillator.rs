//! Mass on an elastic–plastic spring: displacement `u`, plastic strain `εᵖ`,
//! momenta `p = ρu̇` and `π` with `π̇ = σ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{LoadProgram, Observer, Scenario};
use crate::bipotential::{block_bipotential, dilatant_plastic_bipotential, lift_to_symplectic, separated_bipotential, Bipotential};
use crate::convex::ConvexFunction;
use crate::dynamics::{DissipationLaw, HamiltonianSystem, StepResolver};
use crate::error::{Error, Result};
use crate::sben::StepReduction;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveKind {
    /// `load` is a force on the mass.
    #[default]
    Force,
    /// `load` is the imposed elongation; inertia is dropped.
    Displacement,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PlasticFlow {
    /// `σ_y|ε̇ᵖ|` with its conjugate, perfect plasticity.
    #[default]
    Associated,
    /// Non-associated dilatant rule on a (deviatoric, normal) pair; stresses
    /// are confined to `|σ_t| ≤ μ σ_n` and the yield stress bounds the box.
    Dilatant { mu: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorParams {
    pub mass: f64,
    pub stiffness: f64,
    pub yield_stress: f64,
    #[serde(default)]
    pub load: LoadProgram,
    #[serde(default)]
    pub u0: f64,
    #[serde(default)]
    pub v0: f64,
    #[serde(default)]
    pub drive: DriveKind,
    #[serde(default)]
    pub flow: PlasticFlow,
    /// Direction of the load for two-component flow rules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load_direction: Option<Vec<f64>>,
}

impl OscillatorParams {
    pub fn new(mass: f64, stiffness: f64, yield_stress: f64, load: LoadProgram) -> Self {
        Self {
            mass,
            stiffness,
            yield_stress,
            load,
            u0: 0.0,
            v0: 0.0,
            drive: DriveKind::Force,
            flow: PlasticFlow::Associated,
            load_direction: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") })
            }
        };
        positive("mass", self.mass)?;
        positive("stiffness", self.stiffness)?;
        positive("yield_stress", self.yield_stress)?;
        if !(self.u0.is_finite() && self.v0.is_finite()) {
            return Err(Error::InvalidParameter { name: "u0", reason: "initial state must be finite".into() });
        }
        if let PlasticFlow::Dilatant { mu } = self.flow {
            positive("mu", mu)?;
        }
        self.load.validate("load")
    }
}

#[derive(Clone, Debug)]
struct Model {
    m: usize,
    rho: f64,
    k: f64,
    bound: f64,
    yield_stress: Option<f64>,
    load: LoadProgram,
    dir: Vec<f64>,
    drive: DriveKind,
}

impl Model {
    fn offsets(&self) -> (usize, usize, usize, usize) {
        let m = self.m;
        match self.drive {
            DriveKind::Force => (0, m, 2 * m, 3 * m),
            // u and p are absent; εᵖ then π
            DriveKind::Displacement => (usize::MAX, 0, usize::MAX, m),
        }
    }

    fn trial(&self, t1: f64, z0: &[f64], dt: f64) -> Vec<f64> {
        let (iu, ie, ip, _) = self.offsets();
        let l = self.load.value(t1);
        (0..self.m)
            .map(|i| match self.drive {
                DriveKind::Force => {
                    let v0 = z0[ip + i] / self.rho;
                    let pred = z0[iu + i] + dt * v0 + dt * dt * l * self.dir[i] / self.rho;
                    self.k * (pred - z0[ie + i]) / (1.0 + self.k * dt * dt / self.rho)
                }
                DriveKind::Displacement => self.k * (l * self.dir[i] - z0[ie + i]),
            })
            .collect()
    }

    fn assemble(&self, t1: f64, z0: &[f64], dt: f64, sigma: &[f64]) -> Vec<f64> {
        let (iu, ie, ip, ipi) = self.offsets();
        let l = self.load.value(t1);
        let mut z1 = z0.to_vec();
        for i in 0..self.m {
            match self.drive {
                DriveKind::Force => {
                    let v1 = z0[ip + i] / self.rho + dt * (l * self.dir[i] - sigma[i]) / self.rho;
                    let u1 = z0[iu + i] + dt * v1;
                    z1[iu + i] = u1;
                    z1[ie + i] = u1 - sigma[i] / self.k;
                    z1[ip + i] = self.rho * v1;
                }
                DriveKind::Displacement => z1[ie + i] = l * self.dir[i] - sigma[i] / self.k,
            }
            z1[ipi + i] = z0[ipi + i] + dt * sigma[i];
        }
        z1
    }

    fn stress(&self, t: f64, z: &[f64]) -> Vec<f64> {
        let (iu, ie, _, _) = self.offsets();
        (0..self.m)
            .map(|i| {
                let u = match self.drive {
                    DriveKind::Force => z[iu + i],
                    DriveKind::Displacement => self.load.value(t) * self.dir[i],
                };
                self.k * (u - z[ie + i])
            })
            .collect()
    }
}

struct Reduction(Model);

impl StepReduction for Reduction {
    fn reduced_dim(&self) -> usize {
        self.0.m
    }

    fn bounds(&self, _: f64, _: &[f64], _: f64) -> Vec<(f64, f64)> {
        vec![(-self.0.bound, self.0.bound); self.0.m]
    }

    fn assemble(&self, t1: f64, z0: &[f64], dt: f64, r: &[f64]) -> Vec<f64> {
        self.0.assemble(t1, z0, dt, r)
    }

    fn reduce(&self, t1: f64, _: &[f64], z1: &[f64], _: f64) -> Vec<f64> {
        self.0.stress(t1, z1)
    }

    fn prefer(&self, t1: f64, z0: &[f64], dt: f64) -> Vec<f64> {
        self.0.trial(t1, z0, dt).into_iter().map(|s| s.clamp(-self.0.bound, self.0.bound)).collect()
    }
}

/// Elastic predictor, plastic corrector.
struct ReturnMapping(Model);

impl StepResolver for ReturnMapping {
    fn resolve(&self, t1: f64, z0: &[f64], dt: f64) -> Result<Vec<f64>> {
        let sy = self.0.yield_stress.expect("return mapping needs a yield stress");
        let s: Vec<f64> = self.0.trial(t1, z0, dt).into_iter().map(|s| if s.abs() <= sy { s } else { sy.copysign(s) }).collect();
        Ok(self.0.assemble(t1, z0, dt, &s))
    }
}

struct Readout(Model);

impl Observer for Readout {
    fn columns(&self) -> Vec<String> {
        let names = ["u", "sigma", "eps_p"];
        if self.0.m == 1 {
            return names.iter().map(|s| s.to_string()).collect();
        }
        names.iter().flat_map(|n| (1..=self.0.m).map(move |i| format!("{n}_{i}"))).collect()
    }

    fn observe(&self, t: f64, z: &[f64]) -> Vec<f64> {
        let (iu, ie, _, _) = self.0.offsets();
        let m = self.0.m;
        let mut out: Vec<f64> = match self.0.drive {
            DriveKind::Force => z[iu..iu + m].to_vec(),
            DriveKind::Displacement => self.0.dir.iter().map(|d| d * self.0.load.value(t)).collect(),
        };
        out.extend(self.0.stress(t, z));
        out.extend_from_slice(&z[ie..ie + m]);
        out
    }
}

fn hamiltonian(model: &Model) -> Result<HamiltonianSystem> {
    let (m, k, rho) = (model.m, model.k, model.rho);
    match model.drive {
        DriveKind::Force => {
            // ½|p|²/ρ + ½k|u − εᵖ|² − f(t)·d·u
            let n = 4 * m;
            let mut q = DMatrix::zeros(n, n);
            for i in 0..m {
                q[(i, i)] = k;
                q[(m + i, m + i)] = k;
                q[(i, m + i)] = -k;
                q[(m + i, i)] = -k;
                q[(2 * m + i, 2 * m + i)] = 1.0 / rho;
            }
            let (load, dir) = (model.load.clone(), model.dir.clone());
            HamiltonianSystem::quadratic(q, move |t| {
                let mut c = vec![0.0; n];
                let f = load.value(t);
                for i in 0..m {
                    c[i] = f * dir[i];
                }
                c
            })
        }
        DriveKind::Displacement => {
            // ½k|ū(t)d − εᵖ|²
            let (l1, d1) = (model.load.clone(), model.dir.clone());
            let (l2, d2) = (model.load.clone(), model.dir.clone());
            let h = move |t: f64, z: &[f64]| {
                let u = l1.value(t);
                (0..m).map(|i| 0.5 * k * (u * d1[i] - z[i]).powi(2)).sum()
            };
            let g = move |t: f64, z: &[f64]| {
                let u = l2.value(t);
                let mut g = vec![0.0; 2 * m];
                for i in 0..m {
                    g[i] = -k * (u * d2[i] - z[i]);
                }
                g
            };
            Ok(HamiltonianSystem::new(m, h, g).with_hessian(move |_, _| {
                let mut q = DMatrix::zeros(2 * m, 2 * m);
                for i in 0..m {
                    q[(i, i)] = k;
                }
                q
            }))
        }
    }
}

/// Elastoplastic oscillator with the flow rule named in `p`.
pub fn build_elastoplastic_oscillator(p: &OscillatorParams) -> Result<Scenario> {
    p.validate()?;
    let b = match p.flow {
        PlasticFlow::Associated => separated_bipotential(ConvexFunction::Norm { dim: 1, scale: p.yield_stress })?,
        PlasticFlow::Dilatant { mu } => dilatant_plastic_bipotential(mu)?,
    };
    build(p, b, matches!(p.flow, PlasticFlow::Associated))
}

/// Elastoplastic oscillator with a caller-supplied bipotential acting on
/// (plastic strain rate, stress); stresses are searched in `[−σ_y, σ_y]` per component.
pub fn build_oscillator_with_flow_rule(p: &OscillatorParams, b_p: Bipotential) -> Result<Scenario> {
    p.validate()?;
    if b_p.dim() > 2 {
        return Err(Error::Unsupported(format!("flow rules of dimension {} (at most 2)", b_p.dim())));
    }
    build(p, b_p, false)
}

fn build(p: &OscillatorParams, b_p: Bipotential, associated: bool) -> Result<Scenario> {
    let m = b_p.dim();
    let dir = match &p.load_direction {
        Some(d) if d.len() == m && d.iter().all(|v| v.is_finite()) => d.clone(),
        Some(d) => {
            return Err(Error::InvalidParameter {
                name: "load_direction",
                reason: format!("expected {m} finite components, got {}", d.len()),
            })
        }
        None => vec![1.0; m],
    };
    let model = Model {
        m,
        rho: p.mass,
        k: p.stiffness,
        bound: p.yield_stress,
        yield_stress: associated.then_some(p.yield_stress),
        load: p.load.clone(),
        dir: dir.clone(),
        drive: p.drive,
    };
    let sys = hamiltonian(&model)?;
    let (constrained, total) = match p.drive {
        DriveKind::Force => (3 * m, 4 * m),
        DriveKind::Displacement => (m, 2 * m),
    };
    let b = block_bipotential(
        total,
        vec![
            (0..constrained, separated_bipotential(ConvexFunction::IndicatorPoint { point: vec![0.0; constrained] })?),
            (constrained..total, b_p),
        ],
    )?;
    let z0 = match p.drive {
        DriveKind::Force => {
            let mut z = vec![0.0; 4 * m];
            for i in 0..m {
                z[i] = p.u0 * dir[i];
                z[2 * m + i] = p.mass * p.v0 * dir[i];
            }
            z
        }
        DriveKind::Displacement => vec![0.0; 2 * m],
    };
    Ok(Scenario {
        name: "elastoplastic-oscillator".into(),
        sys,
        law: DissipationLaw::Bipotential(lift_to_symplectic(b)?),
        reduction: Box::new(Reduction(model.clone())),
        resolver: associated.then(|| Box::new(ReturnMapping(model.clone())) as Box<dyn StepResolver>),
        observer: Box::new(Readout(model)),
        z0,
    })
}
