//! Bipotentials `b(x, y) ≥ ⟨x, y⟩`, the Coulomb friction bipotential and the
//! lift to phase space `b̂(ż_I, ż) = b(J⁻¹ż_I, ż)`.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::{prox_step, ConvexFunction, MEMBERSHIP_RTOL};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::symplectic::{j_power_flat, omega, omega_flat, PhaseFunction, PhaseVector};
use crate::vector::{dot, lerp, norm};

type BiEval = Arc<dyn Fn(&[f64], &[f64]) -> ExtReal + Send + Sync>;

#[derive(Clone)]
pub struct CustomBipotential {
    pub name: String,
    pub dim: usize,
    eval: BiEval,
}

impl CustomBipotential {
    pub fn new(name: impl Into<String>, dim: usize, eval: impl Fn(&[f64], &[f64]) -> ExtReal + Send + Sync + 'static) -> Self {
        Self { name: name.into(), dim, eval: Arc::new(eval) }
    }
}

#[derive(Clone)]
pub enum Bipotential {
    /// `φ(x) + φ*(y)`.
    Separated {
        phi: ConvexFunction,
        conj: ConvexFunction,
    },
    /// `μ t_n ‖v_t‖` on `{‖t_t‖ ≤ μ t_n, v_n ≤ 0}`, `+∞` elsewhere. Vectors are
    /// laid out as `[tangential…, normal]`.
    Coulomb {
        mu: f64,
        tangential: usize,
    },
    /// Sum of bipotentials acting on disjoint index blocks covering `0..dim`.
    Blocks {
        dim: usize,
        blocks: Vec<(Range<usize>, Bipotential)>,
    },
    Custom(CustomBipotential),
}

impl fmt::Debug for Bipotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Separated { phi, .. } => write!(f, "Separated({phi:?})"),
            Self::Coulomb { mu, tangential } => write!(f, "Coulomb(mu={mu}, tangential={tangential})"),
            Self::Blocks { blocks, .. } => f.debug_list().entries(blocks.iter()).finish(),
            Self::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

/// `b(x, y) = φ(x) + φ*(y)`.
pub fn separated_bipotential(phi: ConvexFunction) -> Result<Bipotential> {
    let conj = phi.conjugate().ok_or(Error::NoConjugate("separated bipotential"))?;
    Ok(Bipotential::Separated { phi, conj })
}

/// Coulomb friction with two tangential directions and one normal.
pub fn coulomb_bipotential(mu: f64) -> Result<Bipotential> {
    coulomb_like(mu, 2)
}

/// Dilatant non-associated flow rule: the Coulomb formula read on a
/// (deviatoric, normal) split of plastic strain rate and stress.
pub fn dilatant_plastic_bipotential(mu: f64) -> Result<Bipotential> {
    coulomb_like(mu, 1)
}

fn coulomb_like(mu: f64, tangential: usize) -> Result<Bipotential> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter { name: "mu", reason: format!("must be positive, got {mu}") });
    }
    Ok(Bipotential::Coulomb { mu, tangential })
}

/// Block-diagonal assembly; the ranges must tile `0..dim` without overlap.
pub fn block_bipotential(dim: usize, mut blocks: Vec<(Range<usize>, Bipotential)>) -> Result<Bipotential> {
    blocks.sort_by_key(|(r, _)| r.start);
    let mut next = 0;
    for (r, b) in &blocks {
        if r.start != next || r.len() != b.dim() {
            return Err(Error::Construction(format!("block {r:?} does not tile 0..{dim} (dim {})", b.dim())));
        }
        next = r.end;
    }
    if next != dim {
        return Err(Error::Construction(format!("blocks cover 0..{next}, expected 0..{dim}")));
    }
    Ok(Bipotential::Blocks { dim, blocks })
}

pub(crate) fn coulomb_admissible_reaction(mu: f64, t: &[f64]) -> bool {
    let (tt, tn) = t.split_at(t.len() - 1);
    let tn = tn[0];
    let scale = 1.0 + tn.abs();
    tn >= -MEMBERSHIP_RTOL * scale && norm(tt) <= mu * tn.max(0.0) + MEMBERSHIP_RTOL * scale
}

impl Bipotential {
    pub fn dim(&self) -> usize {
        match self {
            Self::Separated { phi, .. } => phi.dim(),
            Self::Coulomb { tangential, .. } => tangential + 1,
            Self::Blocks { dim, .. } => *dim,
            Self::Custom(c) => c.dim,
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> ExtReal {
        assert!(
            x.len() == self.dim() && y.len() == self.dim(),
            "bipotential of dimension {} evaluated at {}/{}",
            self.dim(),
            x.len(),
            y.len()
        );
        match self {
            Self::Separated { phi, conj } => phi.eval(x) + conj.eval(y),
            Self::Coulomb { mu, .. } => {
                let (vt, vn) = x.split_at(x.len() - 1);
                let vn = vn[0];
                let tn = y[y.len() - 1];
                let vscale = 1.0 + norm(x);
                if !coulomb_admissible_reaction(*mu, y) || vn > MEMBERSHIP_RTOL * vscale {
                    return ExtReal::PosInf;
                }
                ExtReal::finite(mu * tn.max(0.0) * norm(vt))
            }
            Self::Blocks { blocks, .. } => blocks.iter().fold(ExtReal::ZERO, |acc, (r, b)| acc + b.eval(&x[r.clone()], &y[r.clone()])),
            Self::Custom(c) => (c.eval)(x, y),
        }
    }

    pub fn try_eval(&self, x: &[f64], y: &[f64]) -> Result<ExtReal> {
        for v in [x, y] {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
            }
        }
        Ok(self.eval(x, y))
    }

    /// Prox of `b(·, y)` at `v` with step `tau`, when available in closed form.
    pub fn partial_prox_x(&self, y: &[f64], v: &[f64], tau: f64) -> Result<Vec<f64>> {
        match self {
            Self::Separated { phi, conj } => {
                if !conj.eval(y).is_finite() {
                    return Err(Error::Undefined("b(·, y) is identically +inf"));
                }
                prox_step(phi, v, tau)
            }
            Self::Coulomb { mu, .. } => {
                if !coulomb_admissible_reaction(*mu, y) {
                    return Err(Error::Undefined("b(·, t) is identically +inf outside the cone"));
                }
                // μ t_n ‖v_t‖ + I(v_n ≤ 0): shrink the tangential part, clamp the normal one
                let n = v.len() - 1;
                let thr = tau * mu * y[n].max(0.0);
                let r = norm(&v[..n]);
                let mut out: Vec<f64> = if r <= thr { vec![0.0; n] } else { v[..n].iter().map(|a| a * (1.0 - thr / r)).collect() };
                out.push(v[n].min(0.0));
                Ok(out)
            }
            Self::Blocks { blocks, .. } => {
                let mut out = vec![0.0; v.len()];
                for (r, b) in blocks {
                    out[r.clone()].copy_from_slice(&b.partial_prox_x(&y[r.clone()], &v[r.clone()], tau)?);
                }
                Ok(out)
            }
            Self::Custom(c) => Err(Error::Unsupported(format!("partial prox of custom bipotential {}", c.name))),
        }
    }

    /// Prox of `b(x, ·)` at `w` with step `tau`, when available in closed form.
    pub fn partial_prox_y(&self, x: &[f64], w: &[f64], tau: f64) -> Result<Vec<f64>> {
        match self {
            Self::Separated { phi, conj } => {
                if !phi.eval(x).is_finite() {
                    return Err(Error::Undefined("b(x, ·) is identically +inf"));
                }
                prox_step(conj, w, tau)
            }
            Self::Coulomb { mu, .. } => {
                let n = x.len() - 1;
                if x[n] > MEMBERSHIP_RTOL * (1.0 + norm(x)) {
                    return Err(Error::Undefined("b(v, ·) is identically +inf for opening v_n > 0"));
                }
                // linear term μ‖v_t‖ t_n plus the cone indicator: shift then project
                let mut s = w.to_vec();
                s[n] -= tau * mu * norm(&x[..n]);
                Ok(project_friction_cone(*mu, &s))
            }
            Self::Blocks { blocks, .. } => {
                let mut out = vec![0.0; w.len()];
                for (r, b) in blocks {
                    out[r.clone()].copy_from_slice(&b.partial_prox_y(&x[r.clone()], &w[r.clone()], tau)?);
                }
                Ok(out)
            }
            Self::Custom(c) => Err(Error::Unsupported(format!("partial prox of custom bipotential {}", c.name))),
        }
    }
}

/// Euclidean projection onto `{‖t_t‖ ≤ μ t_n}`.
pub fn project_friction_cone(mu: f64, t: &[f64]) -> Vec<f64> {
    let n = t.len() - 1;
    let r = norm(&t[..n]);
    let tn = t[n];
    if r <= mu * tn {
        return t.to_vec();
    }
    if mu * r <= -tn {
        return vec![0.0; t.len()];
    }
    let alpha = (mu * r + tn) / (1.0 + mu * mu);
    let mut out: Vec<f64> = if r > 0.0 { t[..n].iter().map(|a| a * mu * alpha / r).collect() } else { vec![0.0; n] };
    out.push(alpha);
    out
}

/// `b(x, y) − ⟨x, y⟩`.
pub fn bipotential_gap(b: &Bipotential, x: &[f64], y: &[f64]) -> Result<ExtReal> {
    b.try_eval(x, y)?.try_sub(ExtReal::finite(dot(x, y)))
}

type SymEval = Arc<dyn Fn(&PhaseVector, &PhaseVector) -> ExtReal + Send + Sync>;

/// A bipotential on phase space, `b̂(ż_I, ż) ≥ ω(ż_I, ż)`.
#[derive(Clone)]
pub enum SymplecticBipotential {
    /// `b(J⁻¹ż_I, ż)` on flat `[x; y]` vectors.
    Lifted(Bipotential),
    /// `φ(ż) + φ^{*ω}(ż_I)` for a dissipation potential `φ` with its polar.
    Potential {
        phi: PhaseFunction,
        polar: PhaseFunction,
    },
    Custom {
        name: String,
        dof: usize,
        eval: SymEval,
    },
}

impl fmt::Debug for SymplecticBipotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lifted(b) => write!(f, "Lifted({b:?})"),
            Self::Potential { phi, .. } => write!(f, "Potential({phi:?})"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

pub fn lift_to_symplectic(b: Bipotential) -> Result<SymplecticBipotential> {
    if !b.dim().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: b.dim() + 1, got: b.dim() });
    }
    Ok(SymplecticBipotential::Lifted(b))
}

impl SymplecticBipotential {
    pub fn from_potential(phi: PhaseFunction) -> Result<Self> {
        let polar = crate::symplectic::symplectic_polar(&phi, None)?;
        Ok(Self::Potential { phi, polar })
    }

    /// The law `ż_I = 0`, the lift of the separated bipotential of `I_{0}`.
    pub fn reversible(dof: usize) -> Self {
        let phi = ConvexFunction::IndicatorPoint { point: vec![0.0; 2 * dof] };
        Self::Lifted(separated_bipotential(phi).expect("point indicator has a conjugate"))
    }

    pub fn custom(
        name: impl Into<String>,
        dof: usize,
        eval: impl Fn(&PhaseVector, &PhaseVector) -> ExtReal + Send + Sync + 'static,
    ) -> Self {
        Self::Custom { name: name.into(), dof, eval: Arc::new(eval) }
    }

    pub fn dof(&self) -> usize {
        match self {
            Self::Lifted(b) => b.dim() / 2,
            Self::Potential { phi, .. } => phi.dof(),
            Self::Custom { dof, .. } => *dof,
        }
    }

    pub fn source(&self) -> Option<&Bipotential> {
        match self {
            Self::Lifted(b) => Some(b),
            _ => None,
        }
    }

    pub fn eval(&self, zi: &PhaseVector, z: &PhaseVector) -> Result<ExtReal> {
        let d = self.dof();
        for v in [zi, z] {
            if v.x.len() != d || v.y.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: v.x.len() });
            }
        }
        self.eval_flat(&zi.to_flat(), &z.to_flat())
    }

    /// Evaluation on flat `[x; y]` vectors of length `2·dof`.
    pub fn eval_flat(&self, zi: &[f64], z: &[f64]) -> Result<ExtReal> {
        match self {
            Self::Lifted(b) => Ok(b.eval(&j_power_flat(zi, 3), z)),
            Self::Potential { phi, polar } => Ok(phi.eval_flat(z)? + polar.eval_flat(zi)?),
            Self::Custom { eval, .. } => Ok(eval(&PhaseVector::from_flat(zi)?, &PhaseVector::from_flat(z)?)),
        }
    }

    /// `b̂(ż_I, ż) − ω(ż_I, ż)` on flat vectors.
    pub fn gap_flat(&self, zi: &[f64], z: &[f64]) -> Result<ExtReal> {
        self.eval_flat(zi, z)?.try_sub(ExtReal::finite(omega_flat(zi, z)))
    }
}

/// `b̂(ż_I, ż) − ω(ż_I, ż)`.
pub fn symplectic_bipotential_gap(b: &SymplecticBipotential, zi: &PhaseVector, z: &PhaseVector) -> Result<ExtReal> {
    b.eval(zi, z)?.try_sub(ExtReal::finite(omega(zi, z)?))
}

/// Uniform box sampler for audits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSampler {
    pub half_width: f64,
    pub seed: u64,
}

impl Default for BoxSampler {
    fn default() -> Self {
        Self { half_width: 3.0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub samples: usize,
    /// Samples where both arguments give a finite value.
    pub finite_samples: usize,
    /// Smallest `b(x, y) − ⟨x, y⟩` over finite samples.
    pub min_cross_margin: f64,
    pub cross_violations: usize,
    /// Largest `b(λa + (1−λ)c, ·) − [λ b(a, ·) + (1−λ) b(c, ·)]`, in either argument.
    pub worst_convexity_violation: f64,
    pub convexity_violations: usize,
}

impl AuditReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_cross_margin >= -tol && self.worst_convexity_violation <= tol
    }
}

/// Spot checks of the cross inequality and bi-convexity.
///
/// Samples mix uniform box draws with draws snapped onto the Coulomb cone and
/// onto `x = 0` so that finite-valued regions are visited for indicator-heavy
/// bipotentials.
pub fn axiom_audit(b: &Bipotential, sampler: &BoxSampler, n: usize) -> AuditReport {
    const TOL: f64 = 1e-9;
    let d = b.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let w = sampler.half_width;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..d).map(|_| rng.gen_range(-w..w)).collect() };
    let mut rep = AuditReport {
        samples: n,
        finite_samples: 0,
        min_cross_margin: f64::INFINITY,
        cross_violations: 0,
        worst_convexity_violation: f64::NEG_INFINITY,
        convexity_violations: 0,
    };
    for i in 0..n {
        let (mut x, mut y) = (draw(&mut rng), draw(&mut rng));
        if i % 3 == 1 {
            snap_into_domain(b, &mut x, &mut y);
        }
        if let Some(v) = b.eval(&x, &y).value() {
            rep.finite_samples += 1;
            let m = v - dot(&x, &y);
            rep.min_cross_margin = rep.min_cross_margin.min(m);
            if m < -TOL {
                rep.cross_violations += 1;
            }
        }
        let (x2, y2) = (draw(&mut rng), draw(&mut rng));
        let lam: f64 = rng.gen();
        let in_x = b.eval(&lerp(&x, &x2, lam), &y).try_sub(b.eval(&x, &y).scale(lam) + b.eval(&x2, &y).scale(1.0 - lam));
        let in_y = b.eval(&x, &lerp(&y, &y2, lam)).try_sub(b.eval(&x, &y).scale(lam) + b.eval(&x, &y2).scale(1.0 - lam));
        for e in [in_x, in_y] {
            // an infinite right-hand side imposes nothing
            if let Ok(ExtReal::Finite(e)) = e {
                let rel = e / (1.0 + e.abs().max(1.0));
                rep.worst_convexity_violation = rep.worst_convexity_violation.max(rel);
                if rel > TOL {
                    rep.convexity_violations += 1;
                }
            } else if let Ok(ExtReal::PosInf) = e {
                rep.convexity_violations += 1;
                rep.worst_convexity_violation = f64::INFINITY;
            }
        }
    }
    if rep.finite_samples == 0 {
        rep.min_cross_margin = f64::NAN;
    }
    rep
}

fn snap_into_domain(b: &Bipotential, x: &mut [f64], y: &mut [f64]) {
    match b {
        Bipotential::Coulomb { mu, .. } => {
            let n = x.len() - 1;
            x[n] = -x[n].abs();
            let p = project_friction_cone(*mu, y);
            y.copy_from_slice(&p);
        }
        Bipotential::Separated { phi, conj } => {
            if let Ok(p) = prox_step(conj, y, 1.0) {
                y.copy_from_slice(&p);
            }
            if let Ok(p) = prox_step(phi, x, 1.0) {
                x.copy_from_slice(&p);
            }
        }
        Bipotential::Blocks { blocks, .. } => {
            for (r, bb) in blocks {
                snap_into_domain(bb, &mut x[r.clone()], &mut y[r.clone()]);
            }
        }
        Bipotential::Custom(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{make_indicator, SetDescription};
    use crate::symplectic::j_inverse;

    fn gap(b: &Bipotential, x: &[f64], y: &[f64]) -> f64 {
        bipotential_gap(b, x, y).unwrap().to_f64()
    }

    #[test]
    fn separated_examples() {
        let b = separated_bipotential(ConvexFunction::Norm { dim: 1, scale: 1.0 }).unwrap();
        assert_eq!(b.eval(&[0.5], &[0.8]), ExtReal::finite(0.5));
        assert!((gap(&b, &[0.5], &[0.8]) - 0.1).abs() < 1e-15);
        assert_eq!(gap(&b, &[0.5], &[1.0]), 0.0);
        let z = separated_bipotential(make_indicator(SetDescription::ZeroPoint { dim: 1 }).unwrap()).unwrap();
        for y in [-4.0, 0.0, 9.0] {
            assert_eq!(gap(&z, &[0.0], &[y]), 0.0);
        }
        assert_eq!(z.eval(&[0.1], &[0.0]), ExtReal::PosInf);
    }

    #[test]
    fn coulomb_examples() {
        let b = coulomb_bipotential(0.5).unwrap();
        assert_eq!(gap(&b, &[0.0, 0.0, 0.0], &[0.3, 0.0, 2.0]), 0.0);
        assert!((b.eval(&[0.4, 0.0, 0.0], &[1.0, 0.0, 2.0]).to_f64() - 0.4).abs() < 1e-15);
        assert!(gap(&b, &[0.4, 0.0, 0.0], &[1.0, 0.0, 2.0]).abs() < 1e-15);
        assert!((gap(&b, &[0.4, 0.0, 0.0], &[0.5, 0.0, 2.0]) - 0.2).abs() < 1e-15);
        // separated state and degenerate cone
        assert_eq!(gap(&b, &[0.7, -0.2, -1.0], &[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(b.eval(&[0.7, 0.0, 0.0], &[0.1, 0.0, 0.0]), ExtReal::PosInf);
        assert_eq!(b.eval(&[0.0, 0.0, 0.5], &[0.0, 0.0, 1.0]), ExtReal::PosInf);
        assert!(coulomb_bipotential(0.0).is_err());
    }

    #[test]
    fn blocks_must_tile() {
        let c = coulomb_bipotential(0.3).unwrap();
        let s = separated_bipotential(ConvexFunction::half_norm_squared(1)).unwrap();
        assert!(block_bipotential(4, vec![(0..3, c.clone()), (3..4, s.clone())]).is_ok());
        assert!(block_bipotential(5, vec![(0..3, c.clone()), (3..4, s.clone())]).is_err());
        assert!(block_bipotential(4, vec![(0..3, c), (2..3, s)]).is_err());
    }

    #[test]
    fn lift_of_zero_point_is_zero_point_on_irreversible_velocity() {
        let b = SymplecticBipotential::reversible(1);
        let z = PhaseVector::new(vec![0.3], vec![-1.0]).unwrap();
        let zero = PhaseVector::zeros(1);
        assert_eq!(b.eval(&zero, &z).unwrap(), ExtReal::ZERO);
        assert_eq!(b.eval(&z, &z).unwrap(), ExtReal::PosInf);
        assert_eq!(symplectic_bipotential_gap(&b, &zero, &z).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn potential_form_matches_lift_of_separated_conjugate() {
        let phi =
            crate::symplectic::PhaseFunction::separated(ConvexFunction::Norm { dim: 1, scale: 0.7 }, ConvexFunction::half_norm_squared(1))
                .unwrap();
        let pot = SymplecticBipotential::from_potential(phi).unwrap();
        let flat =
            ConvexFunction::separable(vec![ConvexFunction::Norm { dim: 1, scale: 0.7 }, ConvexFunction::half_norm_squared(1)]).unwrap();
        let lifted = lift_to_symplectic(separated_bipotential(flat.conjugate().unwrap()).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let zi = PhaseVector::new(vec![rng.gen_range(-2.0..2.0)], vec![rng.gen_range(-2.0..2.0)]).unwrap();
            let z = PhaseVector::new(vec![rng.gen_range(-2.0..2.0)], vec![rng.gen_range(-2.0..2.0)]).unwrap();
            let a = pot.eval(&zi, &z).unwrap();
            let b = lifted.eval(&zi, &z).unwrap();
            match (a.value(), b.value()) {
                (Some(a), Some(b)) => assert!((a - b).abs() < 1e-12),
                _ => assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn lifted_coulomb_keeps_extremal_pairs() {
        // 3 + 3 phase block; J⁻¹ż_I carries v = −[u̇] and ż carries the reaction
        let lifted = lift_to_symplectic(
            block_bipotential(
                6,
                vec![(0..3, separated_bipotential(ConvexFunction::zero(3)).unwrap()), (3..6, coulomb_bipotential(0.5).unwrap())],
            )
            .unwrap(),
        )
        .unwrap();
        for (v, t) in [([0.0, 0.0, 0.0], [0.3, 0.0, 2.0]), ([0.4, 0.0, 0.0], [1.0, 0.0, 2.0])] {
            let z = PhaseVector::new(vec![0.0; 3], t.to_vec()).unwrap();
            let target = PhaseVector::new(vec![0.0; 3], v.to_vec()).unwrap();
            let zi = crate::symplectic::j_apply(&target);
            assert_eq!(j_inverse(&zi), target);
            let g = symplectic_bipotential_gap(&lifted, &zi, &z).unwrap().to_f64();
            assert!(g.abs() < 1e-15, "{g}");
        }
    }

    #[test]
    fn partial_prox_outputs_are_minimizers() {
        let b = coulomb_bipotential(0.6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let t = project_friction_cone(0.6, &(0..3).map(|_| rng.gen_range(-2.0..2.0)).collect::<Vec<_>>());
            let tau = rng.gen_range(0.1..2.0);
            let p = b.partial_prox_x(&t, &v, tau).unwrap();
            let obj = |q: &[f64]| b.eval(q, &t) + crate::vector::dot(&crate::vector::sub(q, &v), &crate::vector::sub(q, &v)) / (2.0 * tau);
            let best = obj(&p);
            for _ in 0..50 {
                let q: Vec<f64> = p.iter().map(|a| a + rng.gen_range(-0.05..0.05)).collect();
                assert!(best <= obj(&q) + 1e-12);
            }
            let vv = {
                let mut a = v.clone();
                a[2] = -a[2].abs();
                a
            };
            let py = b.partial_prox_y(&vv, &v, tau).unwrap();
            assert!(coulomb_admissible_reaction(0.6, &py));
            let objy =
                |q: &[f64]| b.eval(&vv, q) + crate::vector::dot(&crate::vector::sub(q, &v), &crate::vector::sub(q, &v)) / (2.0 * tau);
            let besty = objy(&py);
            for _ in 0..50 {
                let q: Vec<f64> = py.iter().map(|a| a + rng.gen_range(-0.05..0.05)).collect();
                assert!(besty <= objy(&q) + 1e-12);
            }
        }
    }

    #[test]
    fn audit_examples() {
        let s = BoxSampler::default();
        let c = axiom_audit(&coulomb_bipotential(0.5).unwrap(), &s, 10_000);
        assert!(c.passes(1e-9), "{c:?}");
        assert!(c.finite_samples > 1000);
        let q = axiom_audit(&separated_bipotential(ConvexFunction::half_norm_squared(2)).unwrap(), &s, 10_000);
        assert!(q.passes(1e-9) && q.cross_violations == 0, "{q:?}");
        let broken = Bipotential::Custom(CustomBipotential::new("broken", 2, |x, y| ExtReal::finite(dot(x, y) - 1.0)));
        let r = axiom_audit(&broken, &s, 10_000);
        assert_eq!(r.cross_violations, 10_000);
        assert!(!r.passes(1e-9));
    }
}
