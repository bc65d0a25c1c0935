//! Rearrangement-invariant function and sequence space calculus at desk scale.
//!
//! Step functions on `(0, ∞)` and finite sequences stand in for elements of
//! symmetric spaces; dense complex matrices stand in for trace-ideal
//! elements. Every operator in [`operators`] acts in closed form, so the
//! inequalities checked in [`verify`] carry no quadrature error.

pub mod error;
pub mod matrix;
pub mod operators;
pub mod optimal_range;
pub mod rearrangement;
pub mod simplex;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::{LipschitzFn, MatrixOp};
pub use operators::{CalderonProfile, IntervalStep};
pub use rearrangement::{ComplexSeq, DecreasingStep, Seq, StepFunction};
pub use spaces::{PhiSpec, SpaceKind, SpaceSpec};

/// Relative tolerance used by the exact (closed-form) comparisons.
pub const REL_TOL: f64 = 1e-12;

/// `a <= b` up to a relative slack of [`REL_TOL`].
pub(crate) fn leq_rel(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
