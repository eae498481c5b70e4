//! Solve border-form polynomial systems `x^α = Σ_{β∈I} a_{α,β} x^β` through the
//! eigenstructure of their multiplication matrices.
//!
//! A system over a lower set `I` has exactly `#I` distinct solutions iff its
//! multiplication matrices commute and are each diagonalizable; in that case
//! the joint eigenvectors are the evaluation vectors of the solutions.
//! [`spectral::solve`] recovers the roots, [`spectral::criterion`] decides the
//! commuting/semisimple condition, and [`interp::system_from_nodes`] builds
//! the system vanishing on a poised interpolation node set.

pub mod cli;
pub mod config;
pub mod eigen;
pub mod error;
pub mod indexsets;
pub mod interp;
pub mod json;
pub mod matrices;
pub mod spectral;
pub mod system;

pub use config::Config;
pub use error::{Error, Result};
pub use indexsets::{border, total_degree_set, validate_lower_set, BorderSet, LowerSet, MultiIndex};
pub use interp::{poisedness, system_from_nodes, NodeSet, PoisednessReport};
pub use matrices::{build_family, commutation_report, MultMatrixFamily};
pub use spectral::{criterion, solve, SolutionSet};
pub use system::{BorderSystem, Point, Scalar};
