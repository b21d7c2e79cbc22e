//! Wideband multilevel fast multipole method for the Helmholtz kernel.
//!
//! Boxes of at least `0.2` wavelengths carry sampled plane-wave patterns with
//! diagonal translations and band-limited spherical harmonic resampling
//! between levels; smaller boxes carry Cartesian Taylor moments with tensor
//! translations.

mod engine;
mod operator;
pub mod sphere;
pub mod taylor;
mod tree;

pub use engine::{direct_sum, Fmm, FmmConfig, FmmField};
pub use operator::{edge_neighbours, error_vs_order_report, two_patch_study, FmmOperators};
pub use tree::{FmmTree, Level, Regime, TreeBox};
