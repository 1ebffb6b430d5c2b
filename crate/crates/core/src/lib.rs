//! Toolkit for compiling a sampled real function into a parallel piecewise
//! phase (or amplitude) oracle circuit, verifying the result by exact
//! state-vector simulation, and evaluating fault-tolerant cost models for the
//! available rotation strategies.
//!
//! The pipeline has four stages:
//!
//! 1. [`segment`] approximates a [`grid::GridFunction`] by prefix-aligned
//!    linear (or cosine) pieces using recursive bisection with an exact
//!    minimax fit.
//! 2. [`oracle`] lowers the resulting [`segment::PiecewiseSpec`] to a gate
//!    circuit ([`circuit::Circuit`]) that applies all per-section rotations in
//!    parallel, with optional measurement-based fan-out/fan-in lowering.
//! 3. [`sim`] is a dense state-vector simulator with seeded mid-circuit
//!    measurement; it is the correctness oracle for every circuit here.
//! 4. [`estimate`] evaluates T-counts, measurement depths, break-even round
//!    counts and repeat-until-success depth statistics for the four rotation
//!    strategies; [`targets`] provides the built-in example functions.
//!
//! Rotation angles are kept as data throughout: Clifford+T synthesis of an
//! arbitrary `Rz` is priced by the cost model, never expanded into gates.

pub mod catalyst;
pub mod circuit;
pub mod estimate;
pub mod fit;
pub mod grid;
pub mod oracle;
pub mod segment;
pub mod sim;
pub mod targets;

pub use circuit::{Circuit, Gate, QubitId};
pub use grid::{GridFunction, ToleranceProfile};
pub use segment::{FitMode, PiecewiseSpec, Segment};
