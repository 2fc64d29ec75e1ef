//! Desk-scale VQE workbench for the antiferromagnetic Heisenberg model on
//! kagome fragments.
//!
//! The crate provides the full pipeline on a classical statevector
//! simulator: lattice fragments and reciprocal-space grids, a gate-level
//! circuit IR with native compilation and global folding, ideal and
//! trajectory-noise simulation with seeded sampling, qubit-wise-commuting
//! energy estimation with an exact-diagonalization oracle, the Euclidean
//! ansatz family with its constant Fubini-Study metric certificate,
//! adaptive natural-gradient and SPSA optimizers, readout-error mitigation
//! and zero-noise extrapolation, and ground-state observables (spin
//! correlations, static spin structure factor).

pub mod ansatz;
pub mod circuit;
pub mod error;
pub mod executor;
pub mod hamiltonian;
pub mod lattice;
pub mod mitigation;
pub mod observables;
pub mod optim;
pub mod simulator;

pub use error::{Error, Result};
