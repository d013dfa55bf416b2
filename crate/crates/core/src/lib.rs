//! Solvers for the defocusing Hartree equation with a nonlocal exchange term
//!
//! ```text
//! -Δu + V u - S[ρ]u + γ (|x|^{-μ} * |u|²) u = λ u,
//! S[ρ]u(x) = ∫ ρ(x, y) u(y) / |x - y|^μ dy,
//! ```
//!
//! discretized on a truncated uniform grid. The crate computes principal
//! eigenpairs of `L[ρ] = -Δ + V - S[ρ]`, ground states of the energy
//! functional, principal solutions through the inverse optimal problem
//! `min ‖ρ̄ - ρ‖²_{L²_μ} s.t. λ₁(ρ) = λ`, its dual, and continuation branches.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod grid;
pub mod iop;
pub mod operators;
pub mod spectral;
pub mod variational;

pub use error::{Error, Result};
pub use grid::{build_grid, build_potential, build_riesz, Grid, GridSpec, Potential, PotentialPreset, RieszTable};
pub use iop::{
    branch_sweep, dual_solve, iop_solve, principal_solve, DualOptions, DualSolution, IopSolution, ScfOptions,
};
pub use operators::{Kernel, OperatorMatrix, Problem, WaveFunction};
pub use spectral::{principal_eigenpair, EigenOptions, EigenPair};
pub use variational::{energy, ground_state, GroundState, GroundStateOptions};
