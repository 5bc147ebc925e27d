//! Reals extended by `+∞`.
//!
//! Every function handled by this crate maps into `ℝ ∪ {+∞}`; `-∞` never
//! occurs. `+∞` is an explicit tag, never a float sentinel.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

pub use ExtReal::PosInf;

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a float. Non-finite input is a programming error.
    pub fn finite(v: f64) -> Self {
        debug_assert!(v.is_finite(), "ExtReal::finite called with {v}");
        ExtReal::Finite(v)
    }

    /// `0` when `inside`, `+∞` otherwise.
    pub fn indicator(inside: bool) -> Self {
        if inside {
            ExtReal::ZERO
        } else {
            PosInf
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            PosInf => None,
        }
    }

    /// The finite value, or `f64::INFINITY`. Only for reporting and plotting.
    pub fn to_f64(self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    /// `self - rhs` for a finite `rhs`; `+∞ - c = +∞`.
    pub fn sub_finite(self, rhs: f64) -> Self {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v - rhs),
            PosInf => PosInf,
        }
    }

    /// `self - rhs`. Subtracting `+∞` is undefined here (it would produce
    /// `-∞` or `∞ - ∞`).
    pub fn try_sub(self, rhs: ExtReal) -> Result<Self> {
        match (self, rhs) {
            (_, PosInf) => Err(Error::Undefined("subtraction of +inf")),
            (a, ExtReal::Finite(b)) => Ok(a.sub_finite(b)),
        }
    }

    /// Multiplication by a nonnegative scalar, with `0 · ∞ = 0`.
    pub fn scale(self, c: f64) -> Self {
        debug_assert!(c >= 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(c * v),
            PosInf if c == 0.0 => ExtReal::ZERO,
            PosInf => PosInf,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            PosInf
        } else {
            ExtReal::finite(v)
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self.sub_finite(-rhs)
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), PosInf) => Some(Ordering::Less),
            (PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (PosInf, PosInf) => Some(Ordering::Equal),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        matches!(self, ExtReal::Finite(v) if v == other)
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&ExtReal::from(*other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            PosInf => write!(f, "+inf"),
        }
    }
}
