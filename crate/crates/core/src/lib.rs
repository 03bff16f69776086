//! Digital simulation toolkit for the linearized optomechanical interaction
//! `H = -g (b + b†)(a + a†)`.
//!
//! The two bosonic modes are truncated to one excitation each and encoded in
//! four qubits with a dual-rail mapping. The evolution `exp(iε(b+b†)(a+a†))`
//! is synthesized exactly (its four Pauli terms commute), lowered to a device
//! basis, routed, and executed on a state-vector simulator with optional
//! depolarizing and readout noise. A reduced tomography pipeline estimates the
//! five logical traces needed for the fidelity against the perturbative
//! target state.
//!
//! # Qubit order
//!
//! Qubit 0 is the leftmost Kronecker factor everywhere in this crate. For a
//! basis index `i` on `n` qubits, qubit `q` is bit `n - 1 - q` of `i`, so the
//! bitstring `"0101"` lists qubits 0..3 left to right and equals index 5.

pub mod analysis;
pub mod boson;
pub mod circuit;
pub mod dense;
pub mod digitizer;
pub mod error;
pub mod experiment;
pub mod pauli;
pub mod simulator;
pub mod tomography;
pub mod transpiler;

pub use error::{Error, Result};
