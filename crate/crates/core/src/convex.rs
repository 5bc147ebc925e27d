//! Extended-real convex functions on `ℝⁿ`: a closed catalog with exact
//! conjugates and proximal maps, plus user-supplied functions.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ext_real::{ExtReal, PosInf};
use crate::search::{minimize_1d, SearchOptions};
use crate::vector::{dot, norm, scale, sub};

/// Relative slack used by set-membership tests.
pub const MEMBERSHIP_RTOL: f64 = 1e-12;

/// Default absolute tolerance of subdifferential gap tests.
pub const GAP_TOL: f64 = 1e-8;

fn slack(scale: f64) -> f64 {
    MEMBERSHIP_RTOL * scale.abs().max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrthantSign {
    NonNegative,
    NonPositive,
}

impl OrthantSign {
    fn flip(self) -> Self {
        match self {
            OrthantSign::NonNegative => OrthantSign::NonPositive,
            OrthantSign::NonPositive => OrthantSign::NonNegative,
        }
    }
}

/// Convex sets accepted by [`make_indicator`].
#[derive(Clone, Debug, PartialEq)]
pub enum SetDescription {
    ZeroPoint {
        dim: usize,
    },
    Point(Vec<f64>),
    Ball {
        dim: usize,
        radius: f64,
    },
    Interval {
        lo: f64,
        hi: f64,
    },
    /// `{v : ⟨normal, v⟩ ≤ offset}`
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// Closed orthant cone.
    Orthant {
        dim: usize,
        sign: OrthantSign,
    },
}

type EvalFn = Arc<dyn Fn(&[f64]) -> ExtReal + Send + Sync>;
type ProxFn = Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>;

/// A convex function given by closures.
#[derive(Clone)]
pub struct CustomConvex {
    pub name: &'static str,
    pub dim: usize,
    pub eval: EvalFn,
    pub prox: Option<ProxFn>,
    pub conjugate: Option<Box<ConvexFunction>>,
    /// Radius beyond which the function is treated as `+∞` by numerical conjugation.
    pub domain_bound: Option<f64>,
}

impl CustomConvex {
    pub fn new(name: &'static str, dim: usize, eval: impl Fn(&[f64]) -> ExtReal + Send + Sync + 'static) -> Self {
        Self { name, dim, eval: Arc::new(eval), prox: None, conjugate: None, domain_bound: None }
    }

    pub fn with_prox(mut self, prox: impl Fn(&[f64], f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.prox = Some(Arc::new(prox));
        self
    }

    pub fn with_conjugate(mut self, conjugate: ConvexFunction) -> Self {
        self.conjugate = Some(Box::new(conjugate));
        self
    }

    pub fn with_domain_bound(mut self, radius: f64) -> Self {
        self.domain_bound = Some(radius);
        self
    }
}

/// Extended-real convex lower semicontinuous function.
#[derive(Clone)]
pub enum ConvexFunction {
    /// `v ↦ ⟨c, v⟩`; the zero function when `c = 0`.
    Linear {
        coeffs: Vec<f64>,
    },
    IndicatorPoint {
        point: Vec<f64>,
    },
    IndicatorInterval {
        lo: f64,
        hi: f64,
    },
    IndicatorBall {
        dim: usize,
        radius: f64,
    },
    IndicatorHalfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    IndicatorOrthant {
        dim: usize,
        sign: OrthantSign,
    },
    /// `w ↦ max(lo·w, hi·w)`, the support function of `[lo, hi]`.
    SupportInterval {
        lo: f64,
        hi: f64,
    },
    /// Support function of the halfspace `{⟨a, v⟩ ≤ b}`:
    /// `λb` when `w = λa` with `λ ≥ 0`, `+∞` otherwise.
    SupportHalfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// `scale · ‖v‖`
    Norm {
        dim: usize,
        scale: f64,
    },
    /// `½⟨v, Qv⟩` with `Q` symmetric positive definite.
    Quadratic {
        q: DMatrix<f64>,
    },
    /// Sum of functions acting on consecutive blocks of coordinates.
    Separable(Vec<ConvexFunction>),
    Custom(CustomConvex),
}

impl fmt::Debug for ConvexFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexFunction::Linear { coeffs } => write!(f, "Linear({coeffs:?})"),
            ConvexFunction::IndicatorPoint { point } => write!(f, "IndicatorPoint({point:?})"),
            ConvexFunction::IndicatorInterval { lo, hi } => write!(f, "IndicatorInterval[{lo}, {hi}]"),
            ConvexFunction::IndicatorBall { dim, radius } => write!(f, "IndicatorBall(dim={dim}, r={radius})"),
            ConvexFunction::IndicatorHalfspace { normal, offset } => {
                write!(f, "IndicatorHalfspace({normal:?} <= {offset})")
            }
            ConvexFunction::IndicatorOrthant { dim, sign } => write!(f, "IndicatorOrthant({dim}, {sign:?})"),
            ConvexFunction::SupportInterval { lo, hi } => write!(f, "SupportInterval[{lo}, {hi}]"),
            ConvexFunction::SupportHalfspace { normal, offset } => {
                write!(f, "SupportHalfspace({normal:?}, {offset})")
            }
            ConvexFunction::Norm { dim, scale } => write!(f, "Norm(dim={dim}, scale={scale})"),
            ConvexFunction::Quadratic { q } => write!(f, "Quadratic({}x{})", q.nrows(), q.ncols()),
            ConvexFunction::Separable(parts) => f.debug_list().entries(parts).finish(),
            ConvexFunction::Custom(c) => write!(f, "Custom({}, dim={})", c.name, c.dim),
        }
    }
}

/// Builds the indicator function of a convex set.
pub fn make_indicator(set: SetDescription) -> Result<ConvexFunction> {
    let bad = |msg: &str| Err(Error::Construction(msg.to_string()));
    match set {
        SetDescription::ZeroPoint { dim } => {
            if dim == 0 {
                return bad("zero-dimensional point");
            }
            Ok(ConvexFunction::IndicatorPoint { point: vec![0.0; dim] })
        }
        SetDescription::Point(point) => {
            if point.is_empty() || point.iter().any(|x| !x.is_finite()) {
                return bad("point must be nonempty and finite");
            }
            Ok(ConvexFunction::IndicatorPoint { point })
        }
        SetDescription::Ball { dim, radius } => {
            if dim == 0 || !(radius >= 0.0) || !radius.is_finite() {
                return bad("ball needs dim > 0 and a finite radius >= 0");
            }
            Ok(ConvexFunction::IndicatorBall { dim, radius })
        }
        SetDescription::Interval { lo, hi } => {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return bad("interval must satisfy lo <= hi with finite bounds");
            }
            Ok(ConvexFunction::IndicatorInterval { lo, hi })
        }
        SetDescription::Halfspace { normal, offset } => {
            if normal.is_empty() || norm(&normal) == 0.0 || !offset.is_finite() {
                return bad("halfspace needs a nonzero normal and finite offset");
            }
            Ok(ConvexFunction::IndicatorHalfspace { normal, offset })
        }
        SetDescription::Orthant { dim, sign } => {
            if dim == 0 {
                return bad("zero-dimensional orthant");
            }
            Ok(ConvexFunction::IndicatorOrthant { dim, sign })
        }
    }
}

impl ConvexFunction {
    pub fn zero(dim: usize) -> Self {
        ConvexFunction::Linear { coeffs: vec![0.0; dim] }
    }

    /// `½‖v‖²`
    pub fn half_norm_squared(dim: usize) -> Self {
        ConvexFunction::Quadratic { q: DMatrix::identity(dim, dim) }
    }

    pub fn quadratic(q: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() || q.nrows() == 0 {
            return Err(Error::Construction("quadratic form must be square".into()));
        }
        if (&q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
            return Err(Error::Construction("quadratic form must be symmetric".into()));
        }
        if q.clone().cholesky().is_none() {
            return Err(Error::Construction("quadratic form must be positive definite".into()));
        }
        Ok(ConvexFunction::Quadratic { q })
    }

    pub fn norm(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 || !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::Construction("norm needs dim > 0 and scale >= 0".into()));
        }
        Ok(ConvexFunction::Norm { dim, scale })
    }

    pub fn separable(parts: Vec<ConvexFunction>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::Construction("separable sum needs at least one block".into()));
        }
        Ok(ConvexFunction::Separable(parts))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFunction::Linear { coeffs } => coeffs.len(),
            ConvexFunction::IndicatorPoint { point } => point.len(),
            ConvexFunction::IndicatorInterval { .. } | ConvexFunction::SupportInterval { .. } => 1,
            ConvexFunction::IndicatorBall { dim, .. } | ConvexFunction::IndicatorOrthant { dim, .. } | ConvexFunction::Norm { dim, .. } => {
                *dim
            }
            ConvexFunction::IndicatorHalfspace { normal, .. } | ConvexFunction::SupportHalfspace { normal, .. } => normal.len(),
            ConvexFunction::Quadratic { q } => q.nrows(),
            ConvexFunction::Separable(parts) => parts.iter().map(ConvexFunction::dim).sum(),
            ConvexFunction::Custom(c) => c.dim,
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        Ok(())
    }

    /// Evaluates the function. Panics on a dimension mismatch; see [`Self::try_eval`].
    pub fn eval(&self, v: &[f64]) -> ExtReal {
        assert_eq!(v.len(), self.dim(), "dimension mismatch in ConvexFunction::eval");
        match self {
            ConvexFunction::Linear { coeffs } => ExtReal::finite(dot(coeffs, v)),
            ConvexFunction::IndicatorPoint { point } => {
                let d = norm(&sub(v, point));
                ExtReal::indicator(d <= slack(norm(point)))
            }
            ConvexFunction::IndicatorInterval { lo, hi } => {
                let x = v[0];
                ExtReal::indicator(x >= lo - slack(*lo) && x <= hi + slack(*hi))
            }
            ConvexFunction::IndicatorBall { radius, .. } => ExtReal::indicator(norm(v) <= radius + slack(*radius)),
            ConvexFunction::IndicatorHalfspace { normal, offset } => {
                let s = dot(normal, v);
                ExtReal::indicator(s <= offset + slack(norm(normal) * norm(v)))
            }
            ConvexFunction::IndicatorOrthant { sign, .. } => {
                let scale = crate::vector::max_abs(v);
                let ok = match sign {
                    OrthantSign::NonNegative => v.iter().all(|&x| x >= -slack(scale)),
                    OrthantSign::NonPositive => v.iter().all(|&x| x <= slack(scale)),
                };
                ExtReal::indicator(ok)
            }
            ConvexFunction::SupportInterval { lo, hi } => ExtReal::finite((lo * v[0]).max(hi * v[0])),
            ConvexFunction::SupportHalfspace { normal, offset } => {
                let lambda = dot(v, normal) / dot(normal, normal);
                let resid = norm(&crate::vector::axpy(v, -lambda, normal));
                let s = slack(norm(v));
                if resid <= s && lambda >= -s {
                    ExtReal::finite(offset * lambda.max(0.0))
                } else {
                    PosInf
                }
            }
            ConvexFunction::Norm { scale, .. } => ExtReal::finite(scale * norm(v)),
            ConvexFunction::Quadratic { q } => {
                let x = DVector::from_column_slice(v);
                ExtReal::finite(0.5 * x.dot(&(q * &x)))
            }
            ConvexFunction::Separable(parts) => {
                let mut offset = 0;
                let mut total = ExtReal::ZERO;
                for p in parts {
                    let d = p.dim();
                    total = total + p.eval(&v[offset..offset + d]);
                    offset += d;
                }
                total
            }
            ConvexFunction::Custom(c) => {
                if let Some(r) = c.domain_bound {
                    if norm(v) > r {
                        return PosInf;
                    }
                }
                (c.eval)(v)
            }
        }
    }

    pub fn try_eval(&self, v: &[f64]) -> Result<ExtReal> {
        self.check_dim(v)?;
        Ok(self.eval(v))
    }

    /// Closed-form Fenchel conjugate, when the catalog knows one.
    pub fn conjugate(&self) -> Option<ConvexFunction> {
        Some(match self {
            ConvexFunction::Linear { coeffs } => ConvexFunction::IndicatorPoint { point: coeffs.clone() },
            ConvexFunction::IndicatorPoint { point } => ConvexFunction::Linear { coeffs: point.clone() },
            ConvexFunction::IndicatorInterval { lo, hi } => ConvexFunction::SupportInterval { lo: *lo, hi: *hi },
            ConvexFunction::SupportInterval { lo, hi } => ConvexFunction::IndicatorInterval { lo: *lo, hi: *hi },
            ConvexFunction::IndicatorBall { dim, radius } => ConvexFunction::Norm { dim: *dim, scale: *radius },
            ConvexFunction::Norm { dim, scale } => ConvexFunction::IndicatorBall { dim: *dim, radius: *scale },
            ConvexFunction::IndicatorHalfspace { normal, offset } => {
                ConvexFunction::SupportHalfspace { normal: normal.clone(), offset: *offset }
            }
            ConvexFunction::SupportHalfspace { normal, offset } => {
                ConvexFunction::IndicatorHalfspace { normal: normal.clone(), offset: *offset }
            }
            // the polar of a closed orthant is the opposite orthant
            ConvexFunction::IndicatorOrthant { dim, sign } => ConvexFunction::IndicatorOrthant { dim: *dim, sign: sign.flip() },
            ConvexFunction::Quadratic { q } => ConvexFunction::Quadratic { q: q.clone().cholesky()?.inverse() },
            ConvexFunction::Separable(parts) => ConvexFunction::Separable(parts.iter().map(|p| p.conjugate()).collect::<Option<Vec<_>>>()?),
            ConvexFunction::Custom(c) => return c.conjugate.as_deref().cloned(),
        })
    }

    /// Radius of a ball containing the effective domain, if known.
    pub fn domain_bound(&self) -> Option<f64> {
        match self {
            ConvexFunction::IndicatorPoint { point } => Some(norm(point)),
            ConvexFunction::IndicatorInterval { lo, hi } => Some(lo.abs().max(hi.abs())),
            ConvexFunction::IndicatorBall { radius, .. } => Some(*radius),
            ConvexFunction::Custom(c) => c.domain_bound,
            _ => None,
        }
    }
}

/// Proximal map `argmin_p f(p) + ‖p − v‖² / (2τ)`.
pub fn prox_step(f: &ConvexFunction, v: &[f64], tau: f64) -> Result<Vec<f64>> {
    f.check_dim(v)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter { name: "tau", reason: format!("must be positive, got {tau}") });
    }
    Ok(match f {
        ConvexFunction::Linear { coeffs } => crate::vector::axpy(v, -tau, coeffs),
        ConvexFunction::IndicatorPoint { point } => point.clone(),
        ConvexFunction::IndicatorInterval { lo, hi } => vec![v[0].clamp(*lo, *hi)],
        ConvexFunction::IndicatorBall { radius, .. } => project_ball(v, *radius),
        ConvexFunction::IndicatorHalfspace { normal, offset } => project_halfspace(v, normal, *offset),
        ConvexFunction::IndicatorOrthant { sign, .. } => v
            .iter()
            .map(|&x| match sign {
                OrthantSign::NonNegative => x.max(0.0),
                OrthantSign::NonPositive => x.min(0.0),
            })
            .collect(),
        ConvexFunction::SupportInterval { lo, hi } => vec![v[0] - v[0].clamp(tau * lo, tau * hi)],
        ConvexFunction::SupportHalfspace { normal, offset } => {
            // Moreau: v − P_{τK}(v)
            let p = project_halfspace(v, normal, tau * offset);
            sub(v, &p)
        }
        ConvexFunction::Norm { scale: s, .. } => {
            let r = norm(v);
            if r <= tau * s {
                vec![0.0; v.len()]
            } else {
                scale(v, 1.0 - tau * s / r)
            }
        }
        ConvexFunction::Quadratic { q } => {
            let n = q.nrows();
            let m = DMatrix::identity(n, n) + q * tau;
            let chol = m.cholesky().ok_or_else(|| Error::Unsupported("I + τQ not positive definite".into()))?;
            chol.solve(&DVector::from_column_slice(v)).as_slice().to_vec()
        }
        ConvexFunction::Separable(parts) => {
            let mut out = Vec::with_capacity(v.len());
            let mut offset = 0;
            for p in parts {
                let d = p.dim();
                out.extend(prox_step(p, &v[offset..offset + d], tau)?);
                offset += d;
            }
            out
        }
        ConvexFunction::Custom(c) => match (&c.prox, c.dim) {
            (Some(prox), _) => prox(v, tau),
            (None, 1) => {
                let x = v[0];
                let w = 10.0 * x.abs().max(tau).max(1.0) + c.domain_bound.unwrap_or(0.0);
                let obj = |p: f64| f.eval(&[p]) + (p - x) * (p - x) / (2.0 * tau);
                let (p, val) = minimize_1d(obj, x - w, x + w, x, &SearchOptions::default());
                if !val.is_finite() {
                    return Err(Error::Unsupported(format!("prox search for {} found no finite value", c.name)));
                }
                vec![p]
            }
            (None, d) => return Err(Error::Unsupported(format!("prox of {} in dimension {d} has no closed form", c.name))),
        },
    })
}

fn project_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let r = norm(v);
    if r <= radius {
        v.to_vec()
    } else {
        scale(v, radius / r)
    }
}

fn project_halfspace(v: &[f64], normal: &[f64], offset: f64) -> Vec<f64> {
    let excess = dot(normal, v) - offset;
    if excess <= 0.0 {
        v.to_vec()
    } else {
        crate::vector::axpy(v, -excess / dot(normal, normal), normal)
    }
}

/// `f(v) + f*(w) − ⟨v, w⟩ ≥ 0`, zero exactly when `w ∈ ∂f(v)`.
/// An infinite `f(v)` or `f*(w)` yields `+∞`.
pub fn fenchel_gap(f: &ConvexFunction, v: &[f64], w: &[f64]) -> Result<ExtReal> {
    let conj = f.conjugate().ok_or(Error::NoConjugate("fenchel_gap"))?;
    let fv = f.try_eval(v)?;
    let fw = conj.try_eval(w)?;
    Ok((fv + fw).sub_finite(dot(v, w)))
}

/// Fenchel gap against a numerically sampled conjugate.
pub fn fenchel_gap_numeric(f: &ConvexFunction, conj: &NumericConjugate, v: &[f64], w: &[f64]) -> Result<ExtReal> {
    let fv = f.try_eval(v)?;
    if !fv.is_finite() {
        return Ok(PosInf);
    }
    Ok((fv + conj.eval(w)?).sub_finite(dot(v, w)))
}

/// `w ∈ ∂f(v)` decided by a gap test.
pub fn in_subdifferential(f: &ConvexFunction, v: &[f64], w: &[f64], tol: f64) -> Result<bool> {
    Ok(fenchel_gap(f, v, w)? <= tol)
}

/// Axis-aligned sampling box of dimension 1 or 2.
#[derive(Clone, Debug, PartialEq)]
pub struct GridBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Construction("box bounds must have equal, nonzero length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Construction("box needs finite lo < hi on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Node spacing per axis for `n` nodes per axis.
    pub fn spacing(&self, n: usize) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) / (n - 1) as f64).collect()
    }

    fn coord(&self, axis: usize, i: usize, n: usize) -> f64 {
        if i == n - 1 {
            self.hi[axis]
        } else {
            self.lo[axis] + (self.hi[axis] - self.lo[axis]) * i as f64 / (n - 1) as f64
        }
    }

    /// Nodes in row-major order together with their multi-index.
    pub fn nodes(&self, n: usize) -> Vec<(Vec<usize>, Vec<f64>)> {
        match self.dim() {
            1 => (0..n).map(|i| (vec![i], vec![self.coord(0, i, n)])).collect(),
            _ => (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (vec![i, j], vec![self.coord(0, i, n), self.coord(1, j, n)]))
                .collect(),
        }
    }
}

pub(crate) fn validate_grid(grid: &GridBox, n: usize) -> Result<()> {
    if grid.dim() > 2 {
        return Err(Error::Unsupported(format!("grid conjugation is limited to dimension 2, got {}", grid.dim())));
    }
    if n < 3 {
        return Err(Error::InvalidParameter { name: "n", reason: format!("need at least 3 nodes per axis, got {n}") });
    }
    Ok(())
}

/// A primal function sampled on a grid; evaluates its conjugate by a direct
/// supremum over the nodes.
#[derive(Clone, Debug)]
pub struct NumericConjugate {
    pub grid: GridBox,
    pub n: usize,
    /// `(node, f(node), node lies on the box boundary)` for finite values only.
    samples: Vec<(Vec<f64>, f64, bool)>,
}

/// Grid-sup conjugate `w ↦ max_v ⟨v, w⟩ − f(v)` over the nodes of `grid`.
pub fn conjugate_numeric(f: &ConvexFunction, grid: &GridBox, n: usize) -> Result<NumericConjugate> {
    validate_grid(grid, n)?;
    if grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: grid.dim() });
    }
    let samples = sample_finite(|v| f.eval(v), grid, n);
    // a point-supported function may fall between nodes; include its support explicitly
    let samples = if samples.is_empty() {
        match f {
            ConvexFunction::IndicatorPoint { point } => vec![(point.clone(), 0.0, false)],
            _ => return Err(Error::Construction("function is +inf on every grid node".into())),
        }
    } else {
        samples
    };
    Ok(NumericConjugate { grid: grid.clone(), n, samples })
}

pub(crate) fn sample_finite(f: impl Fn(&[f64]) -> ExtReal, grid: &GridBox, n: usize) -> Vec<(Vec<f64>, f64, bool)> {
    grid.nodes(n)
        .into_iter()
        .filter_map(|(idx, v)| {
            let on_edge = idx.iter().any(|&i| i == 0 || i == n - 1);
            f(&v).value().map(|fv| (v, fv, on_edge))
        })
        .collect()
}

/// Grid supremum of `score(v) − f(v)`; errors when the maximizer sits on
/// the boundary of the box.
pub(crate) fn grid_sup(samples: &[(Vec<f64>, f64, bool)], at: &[f64], score: impl Fn(&[f64]) -> f64) -> Result<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut best_edge = false;
    for (v, fv, edge) in samples {
        let s = score(v) - fv;
        if s > best || (s == best && best_edge && !edge) {
            best = s;
            best_edge = *edge;
        }
    }
    if best_edge {
        return Err(Error::ConjugateUnreliable { at: at.to_vec() });
    }
    Ok(best)
}

impl NumericConjugate {
    pub fn eval(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.grid.dim() {
            return Err(Error::DimensionMismatch { expected: self.grid.dim(), got: w.len() });
        }
        grid_sup(&self.samples, w, |v| dot(v, w))
    }

    /// Tabulates the conjugate on the nodes of `dual`.
    pub fn tabulate(&self, dual: &GridBox, n: usize) -> Result<SampledConvexFunction> {
        validate_grid(dual, n)?;
        let values = dual.nodes(n).into_iter().map(|(_, w)| self.eval(&w).map(ExtReal::finite)).collect::<Result<Vec<_>>>()?;
        Ok(SampledConvexFunction { grid: dual.clone(), n, values })
    }
}

/// Values of a convex function on the nodes of a uniform grid.
#[derive(Clone, Debug)]
pub struct SampledConvexFunction {
    pub grid: GridBox,
    pub n: usize,
    /// Row-major node values.
    pub values: Vec<ExtReal>,
}

impl SampledConvexFunction {
    pub fn sample(f: &ConvexFunction, grid: &GridBox, n: usize) -> Result<Self> {
        validate_grid(grid, n)?;
        if grid.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: grid.dim() });
        }
        let values = grid.nodes(n).into_iter().map(|(_, v)| f.eval(&v)).collect();
        Ok(Self { grid: grid.clone(), n, values })
    }

    pub fn at(&self, idx: &[usize]) -> ExtReal {
        match idx {
            [i] => self.values[*i],
            [i, j] => self.values[i * self.n + j],
            _ => panic!("grid index of dimension {}", idx.len()),
        }
    }

    /// Discrete midpoint convexity along every axis, up to `tol`.
    pub fn is_grid_convex(&self, tol: f64) -> bool {
        let n = self.n;
        let check = |a: ExtReal, m: ExtReal, b: ExtReal| match (a.value(), m.value(), b.value()) {
            (Some(a), Some(m), Some(b)) => a + b - 2.0 * m >= -tol * (1.0 + a.abs().max(b.abs())),
            (Some(_), None, Some(_)) => false,
            _ => true,
        };
        if self.grid.dim() == 1 {
            return (1..n - 1).all(|i| check(self.at(&[i - 1]), self.at(&[i]), self.at(&[i + 1])));
        }
        (0..n).all(|i| {
            (1..n - 1).all(|j| {
                check(self.at(&[i, j - 1]), self.at(&[i, j]), self.at(&[i, j + 1]))
                    && check(self.at(&[j - 1, i]), self.at(&[j, i]), self.at(&[j + 1, i]))
            })
        })
    }
}

/// The shipped catalog, one representative per family, for audits and sweeps.
pub fn reference_catalog() -> Vec<(&'static str, ConvexFunction)> {
    let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    vec![
        ("zero-point(2)", ConvexFunction::IndicatorPoint { point: vec![0.0; 2] }),
        ("linear(2)", ConvexFunction::Linear { coeffs: vec![0.5, -1.0] }),
        ("interval[-1.5,2]", ConvexFunction::IndicatorInterval { lo: -1.5, hi: 2.0 }),
        ("support[-1.5,2]", ConvexFunction::SupportInterval { lo: -1.5, hi: 2.0 }),
        ("ball(2,1.5)", ConvexFunction::IndicatorBall { dim: 2, radius: 1.5 }),
        ("norm(2,1.5)", ConvexFunction::Norm { dim: 2, scale: 1.5 }),
        ("abs(1,2)", ConvexFunction::Norm { dim: 1, scale: 2.0 }),
        ("halfspace(2)", ConvexFunction::IndicatorHalfspace { normal: vec![1.0, 2.0], offset: 0.5 }),
        ("support-halfspace(1)", ConvexFunction::SupportHalfspace { normal: vec![1.0], offset: 1.5 }),
        ("orthant+(2)", ConvexFunction::IndicatorOrthant { dim: 2, sign: OrthantSign::NonNegative }),
        ("quadratic(2)", ConvexFunction::Quadratic { q }),
        ("half-square(1)", ConvexFunction::half_norm_squared(1)),
        (
            "abs+half-square",
            ConvexFunction::Separable(vec![ConvexFunction::Norm { dim: 1, scale: 1.0 }, ConvexFunction::half_norm_squared(1)]),
        ),
    ]
}
