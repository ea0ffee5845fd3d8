//! Hidden topic-block structure in term-document matrices.
//!
//! The crate builds (optionally log-entropy weighted) term-document matrices,
//! computes a deterministic one-sided Jacobi SVD, detects decomposable block
//! structure from sign-homogeneous right singular vectors, predicts how a
//! bridge word perturbs that structure, selects one leading singular triplet
//! per topic and evaluates retrieval over full, truncated and leading-vector
//! representations.
//!
//! Document and term ids are 0-based inside the library. Every file format
//! and report shows 1-based ids.

pub mod blocks;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod par;
pub mod perturb;
pub mod report;
pub mod select;
pub mod spectral;

pub use error::{Error, Result};
