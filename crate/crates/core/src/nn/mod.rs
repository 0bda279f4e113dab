//! Dense feed-forward networks with hand-written backpropagation, Adam and Polyak averaging.
//!
//! All arithmetic is `f64`. Matrix products go through `matrixmultiply`, which is
//! single-threaded and deterministic, so identical inputs and seeds give bit-identical
//! parameters.

mod adam;
mod checkpoint;
mod matrix;
mod mlp;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CheckpointHeader, NetworkHeader, CHECKPOINT_EXTENSION};
pub use matrix::Matrix;
pub use mlp::{polyak_update, Activation, ForwardCache, Gradients, Layer, Mlp, OutputActivation};

