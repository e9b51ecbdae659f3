//! Measurement-based variational quantum eigensolver (MB-VQE) toolkit.
//!
//! The crate covers the full pipeline:
//!
//! * [`stabilizer`] — Pauli algebra, CHP-style stabilizer tableaus, and
//!   conversion of stabilizer states to local-Clifford-equivalent graph states.
//! * [`graphstate`] — custom entangled resource states built by edge
//!   decoration (four-auxiliary gadgets with tunable measurement angles).
//! * [`mbqc`] — measurement patterns for single-qubit unitaries and CX,
//!   pattern concatenation, layered-circuit compilation, and classical
//!   standardization that absorbs the Clifford part.
//! * [`sim`] — dense statevector backend with lazy entangling, expectation
//!   values, and fidelity checks.
//! * [`models`] — perturbed toric code and lattice Schwinger Hamiltonians
//!   with exact-diagonalization references.
//! * [`vqe`] — derivative-free optimizers and the two experiment drivers.
//!
//! Parallel execution of independent work items (sweep points, Hamiltonian
//! terms) uses rayon when the `parallel` feature is enabled (the default) and
//! falls back to sequential iteration otherwise.

pub mod exec;
pub mod stabilizer;
pub mod graphstate;
pub mod mbqc;
pub mod sim;
pub mod models;
pub mod vqe;
