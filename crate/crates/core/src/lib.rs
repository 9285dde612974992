//! Convex space-like graphs in anti-de Sitter 3-space, their induced
//! intrinsic distances and Fuchsian quotients, and the approximation of
//! curvature `<= -1` surface metrics by hyperbolic cone metrics.

pub mod ads3;
pub mod conemetric;
pub mod error;
pub mod fuchsian;
pub mod graph;
pub mod hyp2;
pub mod smoothing;
pub mod surface;

pub use error::{Error, Result};
