//! Numerical toolkit for the model spaces of almost-maximal-volume Alexandrov
//! geometry: space forms, glued model spaces, distance-difference embeddings,
//! strainers, the purse submersion, volume comparison and finite GH tools.

pub mod config;
pub mod embedding;
pub mod ghlab;
pub mod error;
pub mod experiments;
pub mod modelspace;
pub mod pursemap;
mod quad;
pub mod report;
pub mod spaceform;
pub mod strainer;
pub mod volcomp;

pub use error::{GeomError, Result};
