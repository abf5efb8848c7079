//! Inverse qubit dynamics: given a prescribed trajectory of the Bloch vector,
//! construct the family of Hamiltonians that realizes it, and verify every
//! construction by independent numerical propagation.
//!
//! A trajectory is a triple of time functions `(r(t), θ(t), φ(t))` on `[0, τ]`
//! describing the qubit density matrix in spherical Bloch coordinates. Two
//! regimes are supported:
//!
//! * **constant `r`** — the evolution is unitary and is generated directly by
//!   a one-qubit Hamiltonian ([`unitary`]); the full gauge family is
//!   parametrized by two phase functions `α₁(t), α₂(t)`.
//! * **variable `r`** — the evolution is nonunitary and is realized on a
//!   two-qubit extension (system ⊗ ancilla) through a Kraus pair and its
//!   unitary dilation ([`dilation`]); the gauge family gains an ancilla-side
//!   `SU(2)` path `W(t)`.
//!
//! On top of the synthesis sit the mixed-state geometric phase and the
//! parallel-transport gauge that nulls the dynamical phase ([`phase`]), and a
//! propagation-based verification harness ([`verify`]).

pub mod dilation;
pub mod error;
pub mod linalg;
pub mod path;
pub mod phase;
mod spline;
pub mod tol;
pub mod unitary;
pub mod verify;

pub use error::SynthError;
pub use linalg::{kron, partial_trace_b, trace_distance, CMat2, CMat4};
pub use path::{PathKind, PathSpec, SpectralInit, TimeGrid};
pub use unitary::AlphaGauge;
