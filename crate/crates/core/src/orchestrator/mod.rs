//! Multi-channel runs: configuration, parallel extraction with
//! deterministic interleaving, manifests and throughput metering.

pub mod config;
pub mod manifest;
pub mod meter;
pub mod run;

pub use config::{
    derive_seed, read_seed_file, write_seed_file, ChannelConfig, InputSource, RunConfig, SeedSource,
};
pub use manifest::Manifest;
pub use meter::{kernel_throughput, meter, parallel_scaling, ScalingReport, ThroughputReport};
pub use run::{
    deinterleave, run_extraction, run_extraction_to, ChannelMetrics, ExtractionRun, InterleavedOutput,
    RunSummary,
};
