//! Complex WKB analysis of the cubic oscillator `ψ'' = (4λ³ − 2aλ − 28b)ψ`
//! and the poles of the tritronquée solution of Painlevé I.
//!
//! The crate classifies Stokes complexes, solves the Bohr–Sommerfeld–Boutroux
//! system for pole locations, and checks candidate poles against Stokes
//! multipliers computed by direct integration of the ODE.

pub mod action;
pub mod bsb;
pub mod error;
pub mod monodromy;
pub mod painleve;
pub mod potential;
pub mod quadrature;
pub mod stokes;
pub mod wkb;

pub use error::{Error, Result};
pub use potential::{CubicPotential, GroupElement, ModuliCoords, TurningPointLabels, TurningPointSet};
