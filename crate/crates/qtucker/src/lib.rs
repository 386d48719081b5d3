//! Compiles an arbitrary n-qubit amplitude vector into a shallow, layered
//! quantum-circuit plan.
//!
//! The compiler runs an iterative block-unitary factorization: at each
//! iteration the current core state is split into per-block unitaries (one per
//! qubit block) and a residual core. Block membership is steered by a
//! correlation graph over qubits, the block unitaries are gauged so that the
//! core's overlap with |0...0> never decreases, and block size grows whenever
//! progress stalls. The resulting plan lowers to {Rx, Ry, Rz, CX} gates.
//!
//! Qubit ordering convention: **qubit 0 is the most significant bit** of the
//! amplitude index (big-endian). Every module in this crate shares that
//! convention.
//!
//! Module map:
//!
//! * [`statevec`] — amplitude vectors, unfoldings, marginals, entropies.
//! * [`corrgraph`] — pairwise correlation weights, cut objective, partition
//!   search (exact matching, greedy fallback, k-set agglomeration).
//! * [`tucker`] — one factorization step: closest block-product state,
//!   block-factor extraction, monotone gauge, core update.
//! * [`engine`] — the outer loop: stall detection, block growth, termination,
//!   plan accumulation.
//! * [`synth`] — lowering block factors to gates (ZYZ, two-qubit Cartan).
//! * [`verify`] — independent simulation and trace auditing oracles.

pub mod corrgraph;
pub mod engine;
pub mod io;
mod linalg;
pub mod statevec;
pub mod synth;
pub mod tucker;
pub mod verify;

pub use statevec::{BlockFactor, DensityMatrix, QubitSet, StateVector};
