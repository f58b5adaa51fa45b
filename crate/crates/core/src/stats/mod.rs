//! Statistical validation of raw and extracted streams: correlation
//! functions of decimalized words, a native subset of the standard
//! randomness tests with pass-proportion accounting, histogram divergence,
//! and batch timelines for long runs.

pub mod correlation;
pub mod export;
pub mod kld;
pub mod monitor;
pub mod nist;

pub use correlation::{acf, ccf, decimalize, CorrelationSeries};
pub use export::{export_sts, StsFormat};
pub use kld::{chi2_level, default_bins, kld, Histogram, KldReport};
pub use monitor::{batch_monitor, MonitorConfig, Timeline, TimelinePoint};
pub use nist::{
    block_frequency_test, cusum_test, monobit_test, pass_rate, proportion_interval, run_suite, runs_test,
    CusumMode, NativeTest, TestReport,
};
