//! Polygonal discontinuous Galerkin (PolyDG) discretisation of the stationary
//! Stokes problem.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: polygonal meshes of the unit square, the mesh families used in
//!   the inf-sup studies, and the line-oriented mesh text format;
//! - [`basis`] and [`quadrature`]: bounding-box polynomial bases and
//!   sub-triangulated quadrature on polygons and faces;
//! - [`assembly`]: the interior-penalty velocity form, the velocity-pressure
//!   coupling, the pressure jump stabilisation, mass matrices and the weakly
//!   imposed Dirichlet data;
//! - [`solver`]: the bordered saddle-point solve and error norms;
//! - [`infsup`]: the discrete inf-sup constant from the deflated generalized
//!   eigenvalue problem;
//! - [`harness`]: study drivers, CSV output and the command line front end.

pub mod assembly;
pub mod basis;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod infsup;
pub mod mesh;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::Point2;
