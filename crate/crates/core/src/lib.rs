//! Mixed finite elements for 3D linear elasticity with symmetric,
//! normal-normal continuous stresses on tetrahedra.

pub mod assembly;
pub mod dof_system;
pub mod error;
pub mod geometry_map;
pub mod harness;
pub mod interpolation;
pub mod mesh;
pub mod ref_element;
pub mod symtensor;

pub use error::{Error, Result};
