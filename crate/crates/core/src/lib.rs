//! Numerical laboratory for the conservative cubic Hénon maps
//! `x̄ = y, ȳ = -x + M1 + M2 y ± y³` and their reversible non-conservative
//! perturbations.

pub mod bifurcation;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod maps;
pub mod orbits;

pub use error::{Error, Result};
pub use linalg::{Mat2, Point, Region};
pub use maps::{CubicSign, Family, MapSpec, Perturbation, PlanarMap};
