//! Geometric inhomogeneous random graphs, hyperbolic random graphs, greedy
//! routing and patched routing.

pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod hyperbolic;
pub mod io;
pub mod model;
pub mod patching;
pub mod rng;
pub mod routing;
mod sampler;
pub mod search;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{torus_distance, TorusPoint};
pub use graph::{Graph, VertexId};
pub use model::{Alpha, ModelParams, Vertex};
