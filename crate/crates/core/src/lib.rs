//! Isogeometric boundary integral solver for time-harmonic electromagnetic
//! scattering from closed perfectly conducting bodies.
//!
//! The surface is the limit of Loop subdivision of a triangular control mesh.
//! Surface currents are represented through two scalar potentials expanded in
//! the Loop basis (or in manifold harmonics), and the scattering problem is
//! solved with a Calderon-preconditioned combined field formulation.

pub mod bie;
pub mod constants;
pub mod error;
pub mod fmm;
pub mod lbo;
pub mod linalg;
pub mod mesh;
pub mod postproc;
pub mod solver;
pub mod surface;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Three-component real vector used for all geometry.
pub type Vec3 = nalgebra::Vector3<f64>;
