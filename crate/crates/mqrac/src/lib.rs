//! Exact simulation and verification of multiparty random access codes.
//!
//! A random access code distributes an n-bit string over several parties, each
//! of which may forward a single (qu)bit towards a guessing party that must
//! recover one requested input bit.  This crate evaluates three families of
//! protocols exactly:
//!
//! * entanglement-assisted chains built from Bell-pair and GHZ primitives
//!   ([`earac`]), enumerated branch by branch under the Born rule,
//! * single-qubit channel protocols based on polyhedral Bloch-sphere
//!   encodings ([`qrac`]),
//! * optimal classical baselines found by exhaustive deterministic strategy
//!   search with exact rational scores ([`classical`]).
//!
//! The [`task`] module holds the shared scenario/task/report vocabulary and
//! [`quantum`] is the small statevector engine (1–3 qubits) everything is
//! built on.

pub mod classical;
pub mod earac;
pub mod qrac;
pub mod quantum;
pub mod task;

pub use task::{Error, Result};

/// Tolerance for comparisons of exactly representable quantities.
pub const TOL_EXACT: f64 = 1e-12;
/// Tolerance for simulated values against closed forms.
pub const TOL_SIM: f64 = 1e-9;
/// Tolerance for geometric (Bloch coordinate) comparisons.
pub const TOL_GEOM: f64 = 1e-9;
