//! Automated grading of short exam answers.
//!
//! The library ingests (answer text, human score) records and trains one of
//! three featurizations feeding a seeded random-forest regressor:
//!
//! * **Bag of words** — TF-IDF-weighted token counts, L1-normalized.
//! * **Bag of vectors** — the average of skip-gram word vectors trained
//!   from scratch with Huffman-tree hierarchical softmax.
//! * **Bag of centroids** — a histogram of each answer's words over a
//!   k-means clustering of those word vectors.
//!
//! Predicted marks are integer scores in `0..=max_marks`, and agreement
//! with the human grader is measured by quadratic weighted kappa, per
//! question and averaged. Every stage is deterministic: one master seed
//! drives derived streams for the train/test split, embedding
//! initialization, centroid seeding, and per-tree forest randomness, so a
//! run reproduces bit-for-bit — including across thread-count changes.
//!
//! The typical entry points are [`pipeline::run_pipeline`] for one model,
//! [`pipeline::compare_pipeline`] for the three-way comparison, and
//! [`pipeline::save_model`]/[`pipeline::load_model`] for persistence. The
//! `gradescore` binary wraps these as `synth`, `train`, `grade`,
//! `evaluate`, and `compare` subcommands.

pub mod corpus;
pub mod doc_aggregation;
pub mod embeddings;
pub mod error;
pub mod evaluation;
pub mod forest;
pub mod huffman;
pub mod pipeline;
pub mod rng;
pub mod sparse_features;
mod textio;
pub mod textprep;

pub use corpus::{generate_synthetic, split_dataset, AnswerRecord, Dataset, SplitPair, SynthSpec};
pub use error::{Error, Result};
pub use evaluation::{quadratic_weighted_kappa, KappaReport, ModelKind, MODEL_ORDER};
pub use pipeline::{
    compare_pipeline, evaluate_model, load_model, run_pipeline, save_model, PipelineModel,
    RunConfig,
};
