//! Streaming Toeplitz-hashing randomness extraction for multi-channel
//! quantum random number generators.
//!
//! - [`toeplitz`]: GF(2) Toeplitz products, whole-matrix and split into
//!   `n/k` sub-matrix steps.
//! - [`pipeline`]: the per-channel streaming extractor.
//! - [`planner`]: min-entropy estimation and Leftover-Hash-Lemma dimensioning.
//! - [`source`]: seeded simulation of a multi-sideband noise source and raw
//!   sample files.
//! - [`stats`]: correlation, randomness tests, divergence monitoring.
//! - [`orchestrator`]: parallel multi-channel runs with deterministic
//!   interleaving.
//!
//! ```
//! use toeplitz_qrng::{Extractor, ExtractorDims, Seed};
//!
//! let dims = ExtractorDims::new(2, 4, 2)?;
//! let seed = Seed::new("10110".parse()?);
//! let mut ex = Extractor::new(dims, seed)?;
//! let blocks = ex.ingest_samples(&[0b11, 0b10], 2)?;
//! assert_eq!(blocks[0].to_string(), "10");
//! # Ok::<(), toeplitz_qrng::Error>(())
//! ```

pub mod bits;
pub mod cli;
pub mod error;
pub mod orchestrator;
pub mod pipeline;
pub mod planner;
pub mod source;
pub mod stats;
pub mod toeplitz;

pub use bits::Bits;
pub use error::{Error, Result};
pub use pipeline::Extractor;
pub use planner::{EntropyEstimate, PlanResult, SecurityParameter};
pub use source::{ChannelModel, RawSampleStream, SourceModel};
pub use toeplitz::{matvec_blocked, matvec_full, ColumnTable, ExtractorDims, Seed};
