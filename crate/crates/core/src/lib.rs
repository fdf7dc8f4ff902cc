//! Optical force on a finite zigzag carbon nanotube with a nonlocal,
//! frequency-dispersive surface conductivity.
//!
//! The pipeline runs from the tube description in [`model`] through the
//! surface response in [`conductivity`], the Green functions and the
//! integral-equation kernel, to the induced current in [`current_solver`]
//! and the axial force in [`force`]. [`sweep_engine`] drives parameter
//! sweeps over all of it.

pub mod conductivity;
pub mod current_solver;
pub mod error;
pub mod force;
pub mod green_functions;
pub mod kernel;
pub mod model;
pub mod quad;
pub mod special;
pub mod sweep_engine;

pub use error::{NanoError, Result};
