//! Haar measures on SO(2), O(2), SO(3), O(3) in arbitrary charts.
//!
//! The density of a chart is computed from the Maurer–Cartan form and
//! normalized by Gauss–Legendre quadrature. On top of it sit uniform
//! samplers, the Reynolds projector, invariant-space dimensions and orbit
//! moments.

pub mod cli;
pub mod dsl;
pub mod error;
pub mod group;
pub mod json;
pub mod orbit;
pub mod engine;
pub mod quadrature;
pub mod reynolds;
pub mod sampling;
pub mod tensor;

pub use dsl::{BuiltinChart, Chart};
pub use error::{Error, Result};
pub use group::{GroupElement, GroupTag, Matrix, Quaternion};
pub use engine::{GroupQuadrature, HaarDensity};
pub use quadrature::QuadratureRule;
pub use tensor::Tensor;
