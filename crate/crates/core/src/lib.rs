//! Doubly connected rotating patches (V-states) of the inviscid SQG equation.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: Pochhammer symbols, the Gauss hypergeometric function and the
//!   annulus constants `S_n`, `Λ_n(b)`, each paired with an independent oracle.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration used by the oracles.
//! * [`spectrum`]: the 2×2 mode matrices of the operator linearised at the
//!   annulus, their eigenvalues, the threshold `N(b)` and kernel vectors.
//! * [`contour`]: the discretised boundary equations and Newton continuation of
//!   the bifurcating branches.
//! * [`verify`]: the oracle suite tying every closed-form identity to a
//!   numerical check.

pub mod contour;
pub mod error;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
