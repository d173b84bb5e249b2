//! Similarity of groups of vectors via orthogonal projection onto their spans.
//!
//! The central quantity is the cosine between a vector `b` and a group `A`:
//! the ratio `|p| / |b|`, where `p` is the orthogonal projection of `b` onto
//! the span of `A`'s rows. Two groups are compared by averaging that cosine
//! over the rows of one group against the other, in both directions.
//!
//! Around that measure the crate carries a paraphrase-classification
//! pipeline:
//!
//! - [`embeddings`]: word2vec text tables, tokenization, sentence groups
//! - [`corpus`]: labelled pair files, seeded splits, batch scoring
//! - [`classifier`]: threshold model and grid-search training
//! - [`metrics`]: confusion matrix, precision/recall/F1/accuracy
//!
//! ```
//! use subsim::{groupsim, VectorGroup};
//!
//! let a = VectorGroup::from_rows(vec![vec![1.0, 0.0]]).unwrap();
//! let b = VectorGroup::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
//! let sim = groupsim::sim_symmetric(&a, &b).unwrap();
//! assert!((sim.value - 0.75).abs() < 1e-12);
//! assert_eq!(sim.evaluations, 3);
//! ```

pub mod classifier;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod groupsim;
mod label;
pub mod linalg;
pub mod metrics;
pub mod selftest;
pub mod synthetic;

pub use error::{Error, Result};
pub use label::{Class, ParseClassError};
pub use linalg::{OrthonormalBasis, Vector, VectorGroup, DEFAULT_TOLERANCE};

/// Version string written into model files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
