//! Lagrangian simulator and verification harness for free-boundary
//! incompressible ideal MHD on the slab `T² × (0,1)`.

pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod presets;
pub mod run;
pub mod smoothing;
pub mod studies;

pub use error::{Error, Result};
