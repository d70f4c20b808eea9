//! Link prediction with a GraphSAGE teacher distilled into a graph-free MLP
//! student through rank- and distribution-matching objectives.
//!
//! The numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the default `f64` precision.

pub mod config;
pub mod context;
pub mod error;
pub mod eval;
pub mod graph;
pub mod losses;
pub mod models;
pub mod scalar;
pub mod splits;
pub mod synthetic;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Edge, EdgeSet};
pub use scalar::Scalar;

pub type Tensor = tensor::Tensor<f64>;
pub type Graph = graph::Graph<f64>;
