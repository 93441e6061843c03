//! Trigonometric quantum-classical duality at desk scale.
//!
//! Eigenvalues of the twisted inhomogeneous XXZ chain Hamiltonians, fed in
//! as velocities of the classical trigonometric Ruijsenaars-Schneider model,
//! force the classical Lax spectrum onto exact geometric "strings" centered
//! at the twist parameters. This crate implements both sides of that
//! correspondence and verifies it numerically: closed-form Bethe quantities,
//! a brute-force operator oracle, a nested Bethe solver, the determinant
//! identity behind the proof, and the Gaudin / Calogero-Sutherland and XX
//! free-fermion limits.

pub mod bethe_solver;
pub mod cli;
pub mod duality;
pub mod limits;
pub mod numerics;
pub mod operator_oracle;
pub mod rs_model;
pub mod xxz_bethe;

pub use numerics::C;
