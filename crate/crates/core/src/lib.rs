//! Finite metric measure spaces: nets, snowflake quasimetrics, regularity
//! diagnostics, curvature bounds, distances between spaces, discretization
//! and low-distortion embeddings.

// `!(x > 0.0)` is used on purpose so that NaN fails the check, the
// quadrature nodes are quoted to full published precision, and matrix
// loops index by (i, j) pairs.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod curvature;
pub mod discretize;
pub mod distances;
pub mod embed;
pub mod error;
mod flow;
pub mod io;
pub mod matrix;
pub mod nets;
pub mod regularity;
pub mod snowflake;
pub mod space;
mod transport;

pub use error::{Error, Result};
pub use matrix::SquareMatrix;
pub use space::{Embedding, FiniteMetricMeasureSpace};
