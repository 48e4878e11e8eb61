//! Discretised V-state equations and branch continuation.
//!
//! A patch is described by truncated Fourier coefficients of its two
//! conformal maps ([`PatchPair`]). The stationarity conditions `G_1 = G_2 = 0`
//! are collocated on the unit circle, projected onto the sine modes `sin(nmθ)`,
//! and solved by Newton's method with the amplitude along the kernel direction
//! held fixed.

mod branch;
mod integrals;
mod linearize;
mod newton;
mod patch;

pub use branch::{branch_continue, Branch, BranchOptions, BranchPoint, BranchRecord, PointRecord};
pub use integrals::{
    residual, stream_integral, Boundary, FullSpectrum, ResidualEvaluator, ResidualSpectrum,
    COLLISION_DISTANCE,
};
pub use linearize::{linearization_check, LinearizationReport};
pub use newton::{newton_correct, NewtonOptions, NewtonOutcome};
pub use patch::{BoundarySample, MapValues, PatchPair};

/// Default number of retained `m`-fold modes.
pub const DEFAULT_MODES: usize = 32;
/// Default quadrature and collocation size.
pub const DEFAULT_QUAD: usize = 4096;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 25;
pub const DEFAULT_DS: f64 = 1e-3;

/// Smallest multiple of `4·modes·m` that is at least `target`.
pub fn resolved_quad_size(target: usize, modes: usize, m: usize) -> usize {
    let step = 4 * modes * m;
    target.div_ceil(step).max(1) * step
}
