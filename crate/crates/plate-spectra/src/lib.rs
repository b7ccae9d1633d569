//! Numerical laboratory for the spectrum of the plate operator `Δ² + 1` with
//! hinged ("intermediate") boundary conditions on a laterally periodic strip
//! whose top boundary oscillates periodically at amplitude `ε^α` and period `ε`.
//!
//! The crate computes three families of objects and cross-checks them:
//!
//! * eigenvalues of the perturbed problem, discretized with conforming
//!   Bogner–Fox–Schmit plate elements pulled back through an explicit
//!   diffeomorphism that flattens the oscillating boundary ([`assembly`]),
//! * the three candidate limit problems (hinged, clamped-on-top, and the
//!   Robin-type problem carrying the strange boundary coefficient `γ`),
//!   with high-accuracy 1D reference spectra ([`oracle1d`]),
//! * the strange term `γ` itself, from the biharmonic cell problem on the
//!   semi-infinite periodic strip, by two independent formulas plus a
//!   truncated finite-difference oracle ([`cell`]).
//!
//! The unfolding machinery in [`unfolding`] exposes the microscopic boundary
//! layer of the perturbed eigenfunctions and compares it against the cell
//! solution. The `plate-lab` binary drives the five canonical experiments.

pub mod assembly;
pub mod cell;
pub mod config;
pub mod eigensolve;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod geometry;
pub mod oracle1d;
pub mod profile;
pub mod quadrature;
pub mod unfolding;

pub use assembly::{assemble_limit, assemble_perturbed, FormPencil};
pub use cell::{gamma_energy, gamma_flux, solve_cell, solve_cell_truncated, CellSolution};
pub use eigensolve::{smallest_eigenpairs, smallest_eigenpairs_seeded, EigenResult};
pub use error::{Error, Result};
pub use fem::{build_dofmap, BcKind, DofMap, Grid};
pub use geometry::{classify_regime, DomainSpec, Regime, RegimeReport};
pub use oracle1d::{limit_spectrum, mode_eigenvalues, ModeProblem, TopBc};
pub use profile::Profile;
