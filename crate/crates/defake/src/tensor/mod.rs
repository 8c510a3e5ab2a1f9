//! Dense-array reverse-mode autodiff used by all built-in models.
//!
//! A [`Tape`] records operations on f64 arrays; [`Tape::backward`] walks the
//! recorded nodes in reverse and accumulates gradients for every bound
//! parameter. The op set is deliberately small: exactly what the model zoo
//! needs (affine maps, embeddings, 1-d convolution, pooling, softmax losses,
//! gradient reversal and friends).

mod init;
mod store;
mod tape;


pub use init::ParamInit;
pub use store::{ParamId, ParamStore};
pub use tape::{NodeId, Tape};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("index {index} out of range {bound} in {op}")]
    IndexOutOfRange {
        op: &'static str,
        index: i64,
        bound: usize,
    },
    #[error("invalid argument for {op}: {detail}")]
    InvalidArgument { op: &'static str, detail: String },
    #[error("duplicate parameter name: {0}")]
    DuplicateParam(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;
