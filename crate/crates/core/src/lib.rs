//! Spectral solvers for the leading-order Renner–Teller bending Hamiltonian
//! of a linear triatomic molecule,
//!
//! ```text
//! ℍ₂ = -½Δ ⊗ I + [ (a+b)/2 X² + (a-b)/2 Y²        b X Y          ]
//!                [        b X Y          (a-b)/2 X² + (a+b)/2 Y² ]
//! ```
//!
//! with `0 < b < a`. Everything works in the unit-scale form
//! `HO ⊗ I + b̃ V`, `b̃ = b/a`; see [`params`].
//!
//! Three independent routes to the spectrum are provided: closed forms
//! ([`closed_form`]), Laguerre-basis diagonalization of the angular-momentum
//! sectors ([`sector`]), and a direct two-dimensional finite-difference
//! discretization ([`fd`]). [`perturbation`] expands sector eigenvalues in
//! powers of `b̃` with exact arithmetic, and [`analysis`] draws the
//! ground-state conclusions from the solvers.

pub mod analysis;
pub mod closed_form;
pub mod error;
pub mod fd;
pub mod laguerre;
pub mod matrixform;
pub mod params;
pub mod perturbation;
pub mod quadrature;
pub mod sector;
pub mod table;

pub use error::{Error, Result};
pub use params::{make_params, rescale_eigenvalue, ModelParams, SectorIndex, SectorKind};
