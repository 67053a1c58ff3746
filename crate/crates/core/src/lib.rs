//! Computational toolkit for L-point spin qubits in (111) silicon.
//!
//! Units used throughout: lengths in nm, wave vectors in units of 2π/a,
//! energies in eV, potentials in V.

pub mod linalg;
pub mod lattice;
pub mod tightbinding;
pub mod spinorbit;
pub mod grouptheory;
pub mod valleys;
pub mod injection;
pub mod electrostatics;
pub mod config;
pub mod verify;

pub use lattice::{KPath, KVector, LatticeSpec, SymmetryLabel};
pub use linalg::{CMatrix, HermitianEigen};
