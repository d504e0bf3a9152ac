//! Instruction-tuning data mixtures from two rounds of submodular selection.
//!
//! Tasks are first ranked by a greedy maximizer of a set function over a
//! task-similarity kernel; the greedy gains set per-task instance budgets;
//! a second greedy pass inside each task picks the instances. Examples
//! proportional and equal mixtures are provided as baselines, writing the
//! same [`MixtureManifest`] format.
//!
//! With the default `parallel` feature, kernel construction, naive-greedy
//! scoring, per-task loading and per-task instance selection run on rayon.
//! Outputs are identical with or without the feature.

pub mod allocate;
pub mod baselines;
pub mod error;
pub mod formats;
pub mod greedy;
pub mod kernel;
pub mod par;
pub mod pipeline;
pub mod seed;
pub mod submodular;
pub mod synth;

pub use error::{Error, Result};
pub use formats::{DatasetManifest, EmbeddingMatrix, MixtureManifest};
pub use greedy::{brute_force_opt, lazy_greedy, naive_greedy, SelectionResult};
pub use kernel::{KernelConfig, KernelTransform, SimilarityKernel};
pub use pipeline::{run_mixture, MixtureConfig};
pub use submodular::{FunctionSpec, SubmodularFn};
