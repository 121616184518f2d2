//! Gluing-based shadowing for perturbed discrete dynamical systems.
//!
//! A pseudo-trajectory is cut into true-orbit segments at its perturbation
//! moments; adjacent segments are glued pairwise, round after round, until a
//! single true orbit remains. Each map family supplies the gluing step and
//! the rate function `φ` certifying it:
//!
//! * [`affine`]: `x ↦ Ax + a` on ℝ^d and linear automorphisms of the 2-torus,
//! * [`interval`]: piecewise expanding interval maps with neutral fixed points,
//! * [`symbolic`]: subshifts of finite type.
//!
//! [`shadowing`] runs the parallel and sequential gluing schedules and checks
//! the gap and average-error bounds; [`perturb`] generates seeded
//! pseudo-trajectories. All numerics are generic over [`Scalar`] (`f32`, `f64`).

pub mod affine;
pub mod classify;
pub mod cli;
mod error;
pub mod interval;
pub mod perturb;
pub mod rate;
pub mod scalar;
pub mod shadowing;
pub mod symbolic;
pub mod system;
pub mod trajectory;

pub use classify::{classify, TypeReport};
pub use error::{Error, Result};
pub use rate::{GluingRate, RateFunction, RateShape, Strength};
pub use scalar::Scalar;
pub use system::{GluingCertificate, Map, System};
pub use trajectory::{
    compute_gaps, shadow_error_average, shadow_error_uniform, Orbit, PseudoTrajectory, Window,
};

/// Double-precision instantiations used by the command line runner.
pub type AffineMap = affine::AffineMap<f64>;
pub type TorusAutomorphism = affine::TorusAutomorphism<f64>;
pub type SpectralSplit = affine::SpectralSplit<f64>;
pub type IntervalMap = interval::NeutralIntervalMap<f64>;
pub type SymbolicShift = symbolic::TransitionSystem;
pub type Rate = RateFunction<f64>;
