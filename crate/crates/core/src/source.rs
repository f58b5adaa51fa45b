//! Seeded stand-in for a multi-sideband vacuum-noise entropy source.
//!
//! Each channel adds a quantum noise term and a classical (electronic) noise
//! term, scales by the ADC step `Δ = range / 2^b`, rounds, offsets to the
//! mid code and clamps to `[0, 2^b - 1]`. The classical term may carry
//! first-order autocorrelation to mimic band-limited electronics; with the
//! default correlation of zero every sample is i.i.d.
//!
//! Output is pseudo-random. It exercises the extraction and statistics code
//! end to end and carries none of the physical entropy guarantees of a real
//! detector.
//!
//! Raw sample files are headerless little-endian words of `⌈b/8⌉` bytes. An
//! optional sidecar `<file>.meta` holds `key: value` lines.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::sigma_for_min_entropy;

/// Per-channel min-entropy targets used by [`SourceModel::reference`].
pub const REFERENCE_MIN_ENTROPY: [f64; 3] = [12.9, 13.5, 14.2];
pub const REFERENCE_LABELS: [&str; 3] = ["200MHz", "600MHz", "1GHz"];
/// Quantum-to-classical noise ratio of the reference channels.
pub const REFERENCE_SNR_DB: f64 = 13.0;

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(seed: u64, index: u64, domain: u64) -> u64 {
    let mut x = seed ^ domain.wrapping_mul(0xd6e8_feb8_6659_fd93) ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

const SAMPLE_DOMAIN: u64 = 0x5a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub label: String,
    /// Quantum noise standard deviation, in ADC codes.
    pub sigma_quantum: f64,
    /// Classical noise standard deviation, in ADC codes.
    pub sigma_classical: f64,
    /// Lag-one autocorrelation of the classical term, in `[0, 1)`.
    #[serde(default)]
    pub classical_correlation: f64,
    #[serde(default = "default_adc_bits")]
    pub adc_bits: usize,
    #[serde(default = "default_adc_range")]
    pub adc_range: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: f64,
}

fn default_adc_bits() -> usize {
    16
}

fn default_adc_range() -> f64 {
    65536.0
}

fn default_sample_rate() -> f64 {
    240e6
}

impl ChannelModel {
    /// A 16-bit channel whose quantized total noise has min-entropy
    /// `target_h` bits per sample, split between quantum and classical
    /// noise at `snr_db`.
    pub fn calibrated(label: &str, target_h: f64, snr_db: f64) -> Result<Self> {
        let bits = default_adc_bits();
        let range = default_adc_range();
        let total = sigma_for_min_entropy(target_h, bits, range)?;
        let ratio = 10f64.powf(snr_db / 10.0);
        let sigma_classical = total / (1.0 + ratio).sqrt();
        let sigma_quantum = sigma_classical * ratio.sqrt();
        Ok(ChannelModel {
            label: label.to_string(),
            sigma_quantum,
            sigma_classical,
            classical_correlation: 0.0,
            adc_bits: bits,
            adc_range: range,
            sample_rate_hz: default_sample_rate(),
        })
    }

    pub fn sigma_total(&self) -> f64 {
        (self.sigma_quantum.powi(2) + self.sigma_classical.powi(2)).sqrt()
    }

    /// ADC step in noise units.
    pub fn delta(&self) -> f64 {
        self.adc_range / (1u64 << self.adc_bits) as f64
    }

    /// `10·log10(σq²/σc²)`; infinite without classical noise.
    pub fn snr_db(&self) -> f64 {
        if self.sigma_classical == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (self.sigma_quantum.powi(2) / self.sigma_classical.powi(2)).log10()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_quantum > 0.0) || !self.sigma_quantum.is_finite() {
            return Err(Error::config(format!(
                "channel {}: sigma_quantum must be positive",
                self.label
            )));
        }
        if !(self.sigma_classical >= 0.0) || !self.sigma_classical.is_finite() {
            return Err(Error::config(format!(
                "channel {}: sigma_classical must be non-negative",
                self.label
            )));
        }
        if !(0.0..1.0).contains(&self.classical_correlation) {
            return Err(Error::config(format!(
                "channel {}: classical_correlation must lie in [0, 1)",
                self.label
            )));
        }
        if self.adc_bits == 0 || self.adc_bits > 32 {
            return Err(Error::config(format!(
                "channel {}: adc_bits must be in 1..=32",
                self.label
            )));
        }
        if !(self.adc_range > 0.0) || !(self.sample_rate_hz > 0.0) {
            return Err(Error::config(format!(
                "channel {}: adc_range and sample_rate_hz must be positive",
                self.label
            )));
        }
        Ok(())
    }
}

/// A set of channels sharing one master PRNG seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub prng_seed: u64,
    pub channels: Vec<ChannelModel>,
}

impl SourceModel {
    /// Three channels calibrated to 12.9, 13.5 and 14.2 bits per sample.
    pub fn reference(prng_seed: u64) -> Self {
        let channels = REFERENCE_LABELS
            .iter()
            .zip(REFERENCE_MIN_ENTROPY)
            .map(|(label, h)| {
                ChannelModel::calibrated(label, h, REFERENCE_SNR_DB)
                    .expect("reference targets lie below the clipped-Gaussian peak")
            })
            .collect();
        SourceModel { prng_seed, channels }
    }

    /// Sets the lag-one correlation of every channel's classical noise.
    pub fn with_classical_correlation(mut self, rho: f64) -> Self {
        for c in &mut self.channels {
            c.classical_correlation = rho;
        }
        self
    }

    pub fn channel(&self, channel: usize) -> Result<&ChannelModel> {
        self.channels.get(channel).ok_or_else(|| {
            Error::config(format!(
                "channel {channel} not in a {}-channel model",
                self.channels.len()
            ))
        })
    }

    /// PRNG seed of one channel's substream.
    pub fn channel_seed(&self, channel: usize) -> u64 {
        mix_seed(self.prng_seed, channel as u64, SAMPLE_DOMAIN)
    }

    pub fn snr_db(&self, channel: usize) -> Result<f64> {
        Ok(self.channel(channel)?.snr_db())
    }

    pub fn generator(&self, channel: usize) -> Result<ChannelGenerator> {
        let model = self.channel(channel)?.clone();
        model.validate()?;
        Ok(ChannelGenerator::new(model, self.channel_seed(channel)))
    }

    pub fn generate(&self, channel: usize, count: usize) -> Result<RawSampleStream> {
        let mut generator = self.generator(channel)?;
        let mut samples = vec![0u32; count];
        generator.fill(&mut samples);
        Ok(RawSampleStream {
            samples,
            bits: generator.model.adc_bits,
            meta: Some(generator.meta(channel)),
        })
    }
}

/// Incremental sample source for one channel.
#[derive(Debug, Clone)]
pub struct ChannelGenerator {
    model: ChannelModel,
    seed: u64,
    rng: ChaCha8Rng,
    classical: Option<f64>,
    max_code: f64,
    mid: f64,
    inv_delta: f64,
}

impl ChannelGenerator {
    fn new(model: ChannelModel, seed: u64) -> Self {
        let levels = (1u64 << model.adc_bits) as f64;
        ChannelGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            classical: None,
            max_code: levels - 1.0,
            mid: levels / 2.0,
            inv_delta: 1.0 / model.delta(),
            model,
        }
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    fn meta(&self, channel: usize) -> StreamMeta {
        StreamMeta {
            bits: self.model.adc_bits,
            sample_rate_hz: self.model.sample_rate_hz,
            channel_label: self.model.label.clone(),
            prng_seed: Some(self.seed),
            channel: Some(channel),
        }
    }

    pub fn next_sample(&mut self) -> u32 {
        let z: f64 = self.rng.sample(StandardNormal);
        let quantum = self.model.sigma_quantum * z;
        let rho = self.model.classical_correlation;
        let classical = match self.classical {
            None => self.model.sigma_classical * self.rng.sample::<f64, _>(StandardNormal),
            Some(prev) => {
                let w: f64 = self.rng.sample(StandardNormal);
                rho * prev + self.model.sigma_classical * (1.0 - rho * rho).sqrt() * w
            }
        };
        self.classical = Some(classical);
        let code = ((quantum + classical) * self.inv_delta).round() + self.mid;
        code.clamp(0.0, self.max_code) as u32
    }

    pub fn fill(&mut self, out: &mut [u32]) {
        for slot in out {
            *slot = self.next_sample();
        }
    }
}

/// Provenance recorded alongside raw sample files.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamMeta {
    pub bits: usize,
    pub sample_rate_hz: f64,
    pub channel_label: String,
    pub prng_seed: Option<u64>,
    pub channel: Option<usize>,
}

impl StreamMeta {
    pub fn to_kv(&self) -> String {
        let mut s = format!(
            "bits: {}\nsample_rate_hz: {}\nchannel_label: {}\n",
            self.bits, self.sample_rate_hz, self.channel_label
        );
        if let Some(seed) = self.prng_seed {
            s.push_str(&format!("prng_seed: {seed}\n"));
        }
        if let Some(ch) = self.channel {
            s.push_str(&format!("channel: {ch}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = StreamMeta {
            bits: 16,
            sample_rate_hz: default_sample_rate(),
            channel_label: String::new(),
            prng_seed: None,
            channel: None,
        };
        let mut offset = 0u64;
        for line in text.lines() {
            let here = offset;
            offset += line.len() as u64 + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| Error::format(here, format!("expected `key: value`, got {line:?}")))?;
            let value = value.trim();
            let bad = |what: &str| Error::format(here, format!("invalid {what} {value:?}"));
            match key.trim() {
                "bits" => meta.bits = value.parse().map_err(|_| bad("bits"))?,
                "sample_rate_hz" => meta.sample_rate_hz = value.parse().map_err(|_| bad("sample rate"))?,
                "channel_label" => meta.channel_label = value.to_string(),
                "prng_seed" => meta.prng_seed = Some(value.parse().map_err(|_| bad("seed"))?),
                "channel" => meta.channel = Some(value.parse().map_err(|_| bad("channel"))?),
                _ => {}
            }
        }
        Ok(meta)
    }
}

/// Raw ADC samples; every value is below `2^bits`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSampleStream {
    pub samples: Vec<u32>,
    pub bits: usize,
    pub meta: Option<StreamMeta>,
}

impl RawSampleStream {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn bytes_per_sample(bits: usize) -> usize {
    bits.div_ceil(8)
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Decodes headerless little-endian sample words.
pub fn decode_samples(bytes: &[u8], bits: usize) -> Result<Vec<u32>> {
    if bits == 0 || bits > 32 {
        return Err(Error::usage(format!("unsupported sample width {bits}")));
    }
    let width = bytes_per_sample(bits);
    if bytes.len() % width != 0 {
        let offset = (bytes.len() / width * width) as u64;
        return Err(Error::format(
            offset,
            format!("truncated sample: {} trailing bytes, samples are {width} bytes", bytes.len() % width),
        ));
    }
    bytes
        .chunks_exact(width)
        .enumerate()
        .map(|(i, chunk)| {
            let v = chunk.iter().rev().fold(0u32, |acc, &b| (acc << 8) | b as u32);
            if bits < 32 && v >> bits != 0 {
                Err(Error::format(
                    (i * width) as u64,
                    format!("sample {v} exceeds {bits} bits"),
                ))
            } else {
                Ok(v)
            }
        })
        .collect()
}

pub fn encode_samples(samples: &[u32], bits: usize) -> Vec<u8> {
    let width = bytes_per_sample(bits);
    let mut out = Vec::with_capacity(samples.len() * width);
    for &s in samples {
        out.extend_from_slice(&s.to_le_bytes()[..width]);
    }
    out
}

/// Reads a raw sample file and, when present, its `.meta` sidecar.
pub fn read_raw_file(path: &Path, bits: usize) -> Result<RawSampleStream> {
    let bytes = fs::read(path)?;
    let samples = decode_samples(&bytes, bits)?;
    let meta_file = meta_path(path);
    let meta = if meta_file.exists() {
        let m = StreamMeta::parse(&fs::read_to_string(&meta_file)?)?;
        if m.bits != bits {
            return Err(Error::config(format!(
                "{} declares {} bits, read as {bits}",
                meta_file.display(),
                m.bits
            )));
        }
        Some(m)
    } else {
        None
    };
    Ok(RawSampleStream { samples, bits, meta })
}

/// Writes the samples and, if the stream has metadata, the sidecar file.
pub fn write_raw_file(path: &Path, stream: &RawSampleStream) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_samples(&stream.samples, stream.bits))?;
    if let Some(meta) = &stream.meta {
        fs::write(meta_path(path), meta.to_kv())?;
    }
    Ok(())
}

/// Chunked reader over a raw sample file.
pub struct RawFileReader {
    reader: BufReader<fs::File>,
    bits: usize,
    offset: u64,
}

impl RawFileReader {
    pub fn open(path: &Path, bits: usize) -> Result<Self> {
        if bits == 0 || bits > 32 {
            return Err(Error::usage(format!("unsupported sample width {bits}")));
        }
        Ok(RawFileReader {
            reader: BufReader::with_capacity(1 << 16, fs::File::open(path)?),
            bits,
            offset: 0,
        })
    }

    /// Reads up to `max` samples; an empty result means end of file.
    pub fn read_chunk(&mut self, max: usize) -> Result<Vec<u32>> {
        let width = bytes_per_sample(self.bits);
        let mut buf = Vec::with_capacity(max * width);
        while buf.len() < max * width {
            let available = self.reader.fill_buf()?;
            if available.is_empty() {
                break;
            }
            let take = available.len().min(max * width - buf.len());
            buf.extend_from_slice(&available[..take]);
            self.reader.consume(take);
        }
        let samples = decode_samples(&buf, self.bits).map_err(|e| match e {
            Error::Format { offset, reason } => Error::Format {
                offset: self.offset + offset,
                reason,
            },
            other => other,
        })?;
        self.offset += buf.len() as u64;
        Ok(samples)
    }
}
