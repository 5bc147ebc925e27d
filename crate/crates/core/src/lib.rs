//! Convex analysis, symplectic duality and bipotential-based time integration
//! for dissipative Hamiltonian systems.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` is how NaN gets rejected

pub mod bipotential;
pub mod convex;
pub mod dynamics;
pub mod error;
pub mod ext_real;
pub mod path;
pub mod sben;
pub mod scenarios;
pub mod search;
pub mod symplectic;
pub mod vector;

pub use bipotential::{Bipotential, SymplecticBipotential};
pub use convex::{make_indicator, ConvexFunction, SetDescription};
pub use error::{Error, Result};
pub use ext_real::{ExtReal, PosInf};
pub use symplectic::{omega, pairing, PhaseFunction, PhaseVector};
