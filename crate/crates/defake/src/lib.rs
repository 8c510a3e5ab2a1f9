//! defake: a unified fake-news-detection training framework.
//!
//! The crate is organized around four ideas:
//!
//! - **Keyed batches** ([`dataset::KeyedBatch`]): every model consumes a map
//!   from feature name to a dense array with a shared batch dimension.
//! - **A uniform model contract** ([`models::AbstractModel`]): every model
//!   implements `calculate_loss` and `predict` on top of `forward`, and is
//!   constructed by name through [`models::ModelRegistry`].
//! - **A trainer** ([`trainer::Trainer`]): training/validation/testing with
//!   early stopping, gradient clipping, scheduling, logging, checkpointing
//!   and curve export.
//! - **One-call execution** ([`execution::run`] / [`execution::run_from_yaml`]):
//!   config-driven runs with per-model defaults.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod dataset;
pub mod execution;
pub mod metrics;
pub mod models;
pub mod tensor;
pub mod trainer;
