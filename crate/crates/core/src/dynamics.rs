//! Hamiltonian systems, the reversible/irreversible velocity split and the
//! implicit-Euler oracle for `ż − X_H ∈ ∂^ω φ(ż)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bipotential::SymplecticBipotential;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::path::DiscretePath;
use crate::symplectic::{j_power_flat, PhaseFunction, PhaseVector};

type ScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type MatrixFn = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;

/// `H(t, z)` with its gradient; functions act on flat `[x; y]` vectors.
#[derive(Clone)]
pub struct HamiltonianSystem {
    dof: usize,
    h: ScalarFn,
    grad: VectorFn,
    hessian: Option<MatrixFn>,
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HamiltonianSystem(dof={})", self.dof)
    }
}

impl HamiltonianSystem {
    pub fn new(
        dof: usize,
        h: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { dof, h: Arc::new(h), grad: Arc::new(grad), hessian: None }
    }

    pub fn with_hessian(mut self, hess: impl Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(hess));
        self
    }

    /// `H(t, z) = ½ zᵀ M z − ⟨c(t), z⟩`.
    pub fn quadratic(m: DMatrix<f64>, load: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) {
            return Err(Error::Construction(format!("{}x{} matrix is not a phase-space operator", m.nrows(), m.ncols())));
        }
        if (&m - m.transpose()).abs().max() > 1e-12 * (1.0 + m.abs().max()) {
            return Err(Error::Construction("quadratic Hamiltonian needs a symmetric matrix".into()));
        }
        let dof = m.nrows() / 2;
        let load = Arc::new(load);
        let (m1, m2, m3) = (m.clone(), m.clone(), m);
        let (l1, l2) = (load.clone(), load);
        Ok(Self {
            dof,
            h: Arc::new(move |t, z| {
                let v = DVector::from_column_slice(z);
                0.5 * v.dot(&(&m1 * &v)) - crate::vector::dot(&l1(t), z)
            }),
            grad: Arc::new(move |t, z| {
                let g = &m2 * DVector::from_column_slice(z);
                g.iter().zip(l2(t)).map(|(a, c)| a - c).collect()
            }),
            hessian: Some(Arc::new(move |_, _| m3.clone())),
        })
    }

    /// `H = ½(x² + y²)`.
    pub fn unit_oscillator() -> Self {
        Self::quadratic(DMatrix::identity(2, 2), |_| vec![0.0, 0.0]).expect("identity is symmetric")
    }

    pub fn dof(&self) -> usize {
        self.dof
    }

    pub fn phase_dim(&self) -> usize {
        2 * self.dof
    }

    pub fn hamiltonian(&self, t: f64, z: &PhaseVector) -> f64 {
        (self.h)(t, &z.to_flat())
    }

    pub fn h_flat(&self, t: f64, z: &[f64]) -> f64 {
        (self.h)(t, z)
    }

    pub fn grad_flat(&self, t: f64, z: &[f64]) -> Vec<f64> {
        (self.grad)(t, z)
    }

    pub fn grad_h(&self, t: f64, z: &PhaseVector) -> Result<PhaseVector> {
        self.check(z)?;
        PhaseVector::from_flat(&self.grad_flat(t, &z.to_flat()))
    }

    /// `X_H = J ∇H = (∇_y H, −∇_x H)` on flat vectors.
    pub fn x_h_flat(&self, t: f64, z: &[f64]) -> Vec<f64> {
        j_power_flat(&self.grad_flat(t, z), 1)
    }

    /// Jacobian of `∇H`, analytic when supplied, central differences otherwise.
    pub fn hessian_flat(&self, t: f64, z: &[f64]) -> DMatrix<f64> {
        if let Some(h) = &self.hessian {
            return h(t, z);
        }
        let n = z.len();
        let mut m = DMatrix::zeros(n, n);
        let mut zp = z.to_vec();
        for j in 0..n {
            let step = 1e-6 * (1.0 + z[j].abs());
            zp[j] = z[j] + step;
            let gp = self.grad_flat(t, &zp);
            zp[j] = z[j] - step;
            let gm = self.grad_flat(t, &zp);
            zp[j] = z[j];
            for i in 0..n {
                m[(i, j)] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        m
    }

    /// Largest `‖∇H − FD(H)‖ / (1 + ‖∇H‖)` over the given points.
    pub fn gradient_check(&self, points: &[(f64, Vec<f64>)]) -> f64 {
        let mut worst: f64 = 0.0;
        for (t, z) in points {
            let g = self.grad_flat(*t, z);
            let mut zp = z.clone();
            let mut err = 0.0;
            for j in 0..z.len() {
                let step = 1e-5 * (1.0 + z[j].abs());
                zp[j] = z[j] + step;
                let hp = self.h_flat(*t, &zp);
                zp[j] = z[j] - step;
                let hm = self.h_flat(*t, &zp);
                zp[j] = z[j];
                let fd = (hp - hm) / (2.0 * step);
                err += (fd - g[j]) * (fd - g[j]);
            }
            worst = worst.max(err.sqrt() / (1.0 + crate::vector::norm(&g)));
        }
        worst
    }

    fn check(&self, z: &PhaseVector) -> Result<()> {
        if z.x.len() != self.dof || z.y.len() != self.dof {
            return Err(Error::DimensionMismatch { expected: self.dof, got: z.x.len() });
        }
        Ok(())
    }
}

pub fn symplectic_gradient(sys: &HamiltonianSystem, t: f64, z: &PhaseVector) -> Result<PhaseVector> {
    sys.check(z)?;
    let g = sys.grad_flat(t, &z.to_flat());
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Undefined("non-finite Hamiltonian gradient"));
    }
    PhaseVector::from_flat(&j_power_flat(&g, 1))
}

/// `(ż_R, ż_I) = (X_H, ż − X_H)`.
pub fn velocity_split(zdot: &PhaseVector, x_h: &PhaseVector) -> Result<(PhaseVector, PhaseVector)> {
    if zdot.dof() != x_h.dof() {
        return Err(Error::DimensionMismatch { expected: zdot.dof(), got: x_h.dof() });
    }
    Ok((x_h.clone(), zdot.sub(x_h)))
}

/// Dissipation law: a potential `φ` on velocities or a symplectic bipotential.
#[derive(Clone, Debug)]
pub enum DissipationLaw {
    Potential(PhaseFunction),
    Bipotential(SymplecticBipotential),
}

impl DissipationLaw {
    pub fn reversible(dof: usize) -> Self {
        Self::Bipotential(SymplecticBipotential::reversible(dof))
    }

    /// The equivalent bipotential `φ(ż) + φ^{*ω}(ż_I)` for the potential form.
    pub fn to_bipotential(&self) -> Result<SymplecticBipotential> {
        match self {
            Self::Potential(phi) => SymplecticBipotential::from_potential(phi.clone()),
            Self::Bipotential(b) => Ok(b.clone()),
        }
    }

    pub fn dof(&self) -> usize {
        match self {
            Self::Potential(phi) => phi.dof(),
            Self::Bipotential(b) => b.dof(),
        }
    }

    /// True when the law forces `ż_I = 0`.
    pub fn is_reversible(&self) -> bool {
        use crate::bipotential::Bipotential;
        use crate::convex::ConvexFunction;
        match self {
            Self::Bipotential(SymplecticBipotential::Lifted(Bipotential::Separated {
                phi: ConvexFunction::IndicatorPoint { point },
                ..
            })) => point.iter().all(|&p| p == 0.0),
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    ImplicitEuler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_inner_tol")]
    pub inner_tol: f64,
    #[serde(default = "default_max_inner")]
    pub max_inner_iters: usize,
}

fn default_inner_tol() -> f64 {
    1e-10
}

fn default_max_inner() -> usize {
    50
}

impl OracleConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let c = Self { dt, t_end, scheme: Scheme::ImplicitEuler, inner_tol: default_inner_tol(), max_inner_iters: default_max_inner() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", reason: format!("must be positive, got {}", self.dt) });
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter { name: "t_end", reason: format!("must be at least dt, got {}", self.t_end) });
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::InvalidParameter { name: "inner_tol", reason: "must be positive".into() });
        }
        Ok(())
    }

    /// Number of steps; `t_end` is rounded to the nearest multiple of `dt`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// Closed-form resolution of one implicit-Euler step for a specific law
/// (return mapping, trial-state friction, ...). Works on flat vectors.
pub trait StepResolver: Send + Sync {
    fn resolve(&self, t1: f64, z0: &[f64], dt: f64) -> Result<Vec<f64>>;
}

/// Implicit-Euler step of `ż = X_H(t₁, z₁)` by Newton iteration.
pub fn implicit_euler_hamiltonian(sys: &HamiltonianSystem, t1: f64, z0: &[f64], dt: f64, cfg: &OracleConfig) -> Result<Vec<f64>> {
    let n = z0.len();
    let residual = |z: &[f64]| -> Vec<f64> {
        let x = sys.x_h_flat(t1, z);
        (0..n).map(|i| z[i] - z0[i] - dt * x[i]).collect()
    };
    let mut z = z0.to_vec();
    let mut trace = Vec::new();
    for _ in 0..cfg.max_inner_iters.max(2) {
        let r = residual(&z);
        let rn = crate::vector::norm(&r);
        trace.push(rn);
        let scale = 1.0 + crate::vector::norm(&z);
        if rn <= 1e-15 * scale && trace.len() > 1 {
            return Ok(z);
        }
        // ∂/∂z [z − dt·J∇H(z)] = I − dt·J·Hess
        let hess = sys.hessian_flat(t1, &z);
        let mut jac = DMatrix::<f64>::identity(n, n);
        for c in 0..n {
            let col: Vec<f64> = (0..n).map(|i| hess[(i, c)]).collect();
            let jcol = j_power_flat(&col, 1);
            for i in 0..n {
                jac[(i, c)] -= dt * jcol[i];
            }
        }
        let delta = jac.lu().solve(&DVector::from_vec(r)).ok_or(Error::NonConvergence { step: 0, trace: trace.clone() })?;
        let dn = delta.norm();
        for i in 0..n {
            z[i] -= delta[i];
        }
        if dn <= 1e-15 * scale {
            return Ok(z);
        }
    }
    let r = crate::vector::norm(&residual(&z));
    if r <= cfg.inner_tol * (1.0 + crate::vector::norm(&z)) {
        return Ok(z);
    }
    trace.push(r);
    Err(Error::NonConvergence { step: 0, trace })
}

/// One oracle step. Uses `resolver` when given; the reversible law is handled
/// by Newton iteration; other laws need a resolver.
pub fn oracle_step(
    sys: &HamiltonianSystem,
    law: &DissipationLaw,
    resolver: Option<&dyn StepResolver>,
    t: f64,
    z_k: &[f64],
    dt: f64,
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    let t1 = t + dt;
    let z1 = match resolver {
        Some(r) => r.resolve(t1, z_k, dt)?,
        None if law.is_reversible() => implicit_euler_hamiltonian(sys, t1, z_k, dt, cfg)?,
        None => return Err(Error::Unsupported("oracle step needs a closed-form resolver for this law".into())),
    };
    let res = crate::sben::step_residual(law, sys, z_k, &z1, t, t1)?;
    let tol = cfg.inner_tol * dt * res.dissipation_term.value().map_or(1.0, |v| (v.abs() / dt).max(1.0));
    match res.gap {
        ExtReal::Finite(g) if g <= tol => Ok(z1),
        g => Err(Error::Inadmissible { step: 0, gap: g.to_f64(), tol }),
    }
}

/// Oracle path on `t_k = k·dt`.
pub fn oracle_trajectory(
    sys: &HamiltonianSystem,
    law: &DissipationLaw,
    resolver: Option<&dyn StepResolver>,
    z0: &[f64],
    cfg: &OracleConfig,
) -> Result<DiscretePath> {
    cfg.validate()?;
    let n = cfg.steps();
    let mut nodes = Vec::with_capacity(n + 1);
    nodes.push(z0.to_vec());
    for k in 0..n {
        let z1 = oracle_step(sys, law, resolver, cfg.time(k), &nodes[k], cfg.dt, cfg).map_err(|e| e.at_step(k))?;
        nodes.push(z1);
    }
    DiscretePath::uniform(cfg.dt, nodes)
}
