//! Run configuration.
//!
//! On disk a run is described by a TOML file:
//!
//! ```toml
//! master_seed = 2021          # derives channel seeds not loaded from files
//! max_blocks = 1000           # optional per-channel block limit
//! chunk_samples = 49152       # optional, samples per worker read
//! parallel = true             # optional, one worker thread per channel
//!
//! [[channel]]
//! label = "200MHz"
//! m = 519
//! n = 768
//! k = 16
//! seed_file = "seed0.bin"     # optional; packed LSB-first, ⌈(m+n-1)/8⌉ bytes
//! input = "raw0.bin"          # raw sample file ...
//! sample_bits = 16            # ... and its word width (default 16)
//!
//! [[channel]]
//! label = "600MHz"
//! m = 548
//! n = 768
//! k = 16
//! [channel.simulate]          # ... or a simulated source
//! sigma_quantum = 4333.0
//! sigma_classical = 969.0
//! samples = 480000
//! prng_seed = 7               # optional; derived from master_seed otherwise
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::source::{mix_seed, ChannelModel};
use crate::toeplitz::{ExtractorDims, Seed};

pub const DEFAULT_CHUNK_SAMPLES: usize = 48 * 1024;
const TOEPLITZ_SEED_DOMAIN: u64 = 0x7e;
const SIM_SEED_DOMAIN: u64 = 0x51;

/// Where a channel's Toeplitz seed comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSource {
    /// Expanded from the run's master seed and the channel index.
    Derived,
    File(PathBuf),
    Given(Seed),
}

/// Where a channel's raw samples come from.
#[derive(Debug, Clone)]
pub enum InputSource {
    File { path: PathBuf, sample_bits: usize },
    Simulated { model: ChannelModel, prng_seed: u64, samples: u64 },
    Memory { samples: Arc<Vec<u32>>, sample_bits: usize },
}

impl InputSource {
    pub fn describe(&self) -> String {
        match self {
            InputSource::File { path, sample_bits } => {
                format!("file {} ({sample_bits}-bit)", path.display())
            }
            InputSource::Simulated { model, prng_seed, samples } => format!(
                "simulated {} sigma_quantum={} sigma_classical={} classical_correlation={} \
                 adc_bits={} adc_range={} prng_seed={prng_seed} samples={samples}",
                model.label,
                model.sigma_quantum,
                model.sigma_classical,
                model.classical_correlation,
                model.adc_bits,
                model.adc_range
            ),
            InputSource::Memory { samples, sample_bits } => {
                format!("memory {} samples ({sample_bits}-bit)", samples.len())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChannelConfig {
    pub label: String,
    pub dims: ExtractorDims,
    pub seed: SeedSource,
    pub input: InputSource,
}

/// Multi-channel extraction run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub master_seed: u64,
    pub channels: Vec<ChannelConfig>,
    pub max_blocks: Option<u64>,
    pub chunk_samples: usize,
    pub parallel: bool,
}

impl RunConfig {
    pub fn new(master_seed: u64, channels: Vec<ChannelConfig>) -> Self {
        RunConfig {
            master_seed,
            channels,
            max_blocks: None,
            chunk_samples: DEFAULT_CHUNK_SAMPLES,
            parallel: true,
        }
    }

    /// Toeplitz seed of channel `index`, loading or deriving it as configured.
    pub fn channel_seed(&self, index: usize) -> Result<Seed> {
        let ch = &self.channels[index];
        let seed = match &ch.seed {
            SeedSource::Derived => derive_seed(self.master_seed, index, &ch.dims),
            SeedSource::File(path) => read_seed_file(path, &ch.dims)?,
            SeedSource::Given(seed) => seed.clone(),
        };
        seed.check(&ch.dims)?;
        Ok(seed)
    }

    /// Checks channel count, seed lengths and seed distinctness.
    pub fn validate(&self) -> Result<Vec<Seed>> {
        if self.channels.is_empty() {
            return Err(Error::config("a run needs at least one channel"));
        }
        if self.chunk_samples == 0 {
            return Err(Error::config("chunk_samples must be positive"));
        }
        let seeds = (0..self.channels.len())
            .map(|i| self.channel_seed(i))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..seeds.len() {
            for j in 0..i {
                if seeds[i] == seeds[j] {
                    return Err(Error::config(format!(
                        "channels {j} and {i} share the same Toeplitz seed"
                    )));
                }
            }
        }
        for ch in &self.channels {
            if let InputSource::Simulated { model, .. } = &ch.input {
                model.validate()?;
            }
        }
        Ok(seeds)
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let file: FileConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        file.into_run(base_dir)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_toml(&text, base)
    }
}

/// Deterministic seed for channel `index` of a run.
pub fn derive_seed(master_seed: u64, index: usize, dims: &ExtractorDims) -> Seed {
    let mut rng = ChaCha20Rng::seed_from_u64(mix_seed(master_seed, index as u64, TOEPLITZ_SEED_DOMAIN));
    Seed::random(dims, &mut rng)
}

/// Simulator seed for channel `index` when the config gives none.
pub fn derive_sim_seed(master_seed: u64, index: usize) -> u64 {
    mix_seed(master_seed, index as u64, SIM_SEED_DOMAIN)
}

pub fn read_seed_file(path: &Path, dims: &ExtractorDims) -> Result<Seed> {
    let bytes = fs::read(path)?;
    let want = dims.seed_len().div_ceil(8);
    if bytes.len() != want {
        return Err(Error::format(
            bytes.len().min(want) as u64,
            format!(
                "seed file {} has {} bytes, dims {dims} need {want}",
                path.display(),
                bytes.len()
            ),
        ));
    }
    Ok(Seed::new(Bits::from_bytes(&bytes, dims.seed_len())?))
}

pub fn write_seed_file(path: &Path, seed: &Seed) -> Result<()> {
    fs::write(path, seed.bits().to_bytes())?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    master_seed: u64,
    max_blocks: Option<u64>,
    chunk_samples: Option<usize>,
    parallel: Option<bool>,
    #[serde(rename = "channel", default)]
    channels: Vec<FileChannel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileChannel {
    label: Option<String>,
    m: usize,
    n: usize,
    k: usize,
    seed_file: Option<PathBuf>,
    input: Option<PathBuf>,
    sample_bits: Option<usize>,
    simulate: Option<FileSimulate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSimulate {
    sigma_quantum: f64,
    sigma_classical: f64,
    #[serde(default)]
    classical_correlation: f64,
    adc_bits: Option<usize>,
    adc_range: Option<f64>,
    sample_rate_hz: Option<f64>,
    prng_seed: Option<u64>,
    samples: u64,
}

impl FileConfig {
    fn into_run(self, base: &Path) -> Result<RunConfig> {
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let master_seed = self.master_seed;
        let channels = self
            .channels
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let label = c.label.unwrap_or_else(|| format!("ch{i}"));
                let dims = ExtractorDims::new(c.m, c.n, c.k)?;
                let seed = match c.seed_file {
                    Some(p) => SeedSource::File(resolve(p)),
                    None => SeedSource::Derived,
                };
                let input = match (c.input, c.simulate) {
                    (Some(path), None) => InputSource::File {
                        path: resolve(path),
                        sample_bits: c.sample_bits.unwrap_or(16),
                    },
                    (None, Some(sim)) => {
                        let model = ChannelModel {
                            label: label.clone(),
                            sigma_quantum: sim.sigma_quantum,
                            sigma_classical: sim.sigma_classical,
                            classical_correlation: sim.classical_correlation,
                            adc_bits: sim.adc_bits.unwrap_or(16),
                            adc_range: sim.adc_range.unwrap_or(65536.0),
                            sample_rate_hz: sim.sample_rate_hz.unwrap_or(240e6),
                        };
                        InputSource::Simulated {
                            model,
                            prng_seed: sim.prng_seed.unwrap_or_else(|| derive_sim_seed(master_seed, i)),
                            samples: sim.samples,
                        }
                    }
                    _ => {
                        return Err(Error::config(format!(
                            "channel {label}: give exactly one of `input` or `[channel.simulate]`"
                        )))
                    }
                };
                Ok(ChannelConfig { label, dims, seed, input })
            })
            .collect::<Result<Vec<_>>>()?;
        let run = RunConfig {
            master_seed,
            channels,
            max_blocks: self.max_blocks,
            chunk_samples: self.chunk_samples.unwrap_or(DEFAULT_CHUNK_SAMPLES),
            parallel: self.parallel.unwrap_or(true),
        };
        if run.channels.is_empty() {
            return Err(Error::config("config defines no [[channel]]"));
        }
        Ok(run)
    }
}
