use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::orchestrator::config::RunConfig;
use crate::orchestrator::run::{describe_seed, ChannelMetrics};
use crate::toeplitz::Seed;

pub const MANIFEST_FORMAT: &str = "toeplitz-qrng-manifest/1";

/// Ordered `key: value` record describing an interleaved output file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl Manifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub(crate) fn for_run(config: &RunConfig, seeds: &[Seed], metrics: &[ChannelMetrics]) -> Self {
        let mut m = Manifest::default();
        let total: u64 = metrics.iter().map(|c| c.bits_out).sum();
        m.push("format", MANIFEST_FORMAT);
        m.push("bit_order", "lsb-first");
        m.push("interleave", "round-robin-block");
        m.push(
            "interleave_order",
            (0..metrics.len()).map(|i| i.to_string()).collect::<Vec<_>>().join(","),
        );
        m.push("master_seed", config.master_seed);
        m.push(
            "max_blocks",
            config.max_blocks.map_or("none".to_string(), |b| b.to_string()),
        );
        m.push("chunk_samples", config.chunk_samples);
        m.push("channels", metrics.len());
        m.push("total_bits", total);
        m.push("output_bytes", total.div_ceil(8));
        for (i, ((ch, seed), met)) in config.channels.iter().zip(seeds).zip(metrics).enumerate() {
            let p = format!("channel.{i}.");
            m.push(format!("{p}label"), &ch.label);
            m.push(format!("{p}m"), ch.dims.m());
            m.push(format!("{p}n"), ch.dims.n());
            m.push(format!("{p}k"), ch.dims.k());
            m.push(format!("{p}seed"), describe_seed(&ch.seed));
            m.push(
                format!("{p}seed_fnv1a"),
                format!("{:016x}", fnv1a(&seed.bits().to_bytes())),
            );
            m.push(format!("{p}input"), ch.input.describe());
            m.push(format!("{p}samples_in"), met.samples_in);
            m.push(format!("{p}blocks"), met.blocks);
            m.push(format!("{p}bits_out"), met.bits_out);
            m.push(format!("{p}discarded_steps"), met.discarded_steps);
        }
        m
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}: {v}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = Manifest::default();
        let mut offset = 0u64;
        for line in text.lines() {
            let here = offset;
            offset += line.len() as u64 + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once(": ")
                .ok_or_else(|| Error::format(here, format!("manifest line {line:?} lacks `: `")))?;
            m.push(k, v);
        }
        Ok(m)
    }

    pub fn total_bits(&self) -> Option<u64> {
        self.get("total_bits")?.parse().ok()
    }

    /// `(blocks, m)` per channel.
    pub fn channel_blocks(&self) -> Vec<(u64, u64)> {
        let n: usize = self.get("channels").and_then(|v| v.parse().ok()).unwrap_or(0);
        (0..n)
            .filter_map(|i| {
                let blocks = self.get(&format!("channel.{i}.blocks"))?.parse().ok()?;
                let m = self.get(&format!("channel.{i}.m"))?.parse().ok()?;
                Some((blocks, m))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut m = Manifest::default();
        m.push("channels", 1);
        m.push("channel.0.blocks", 3);
        m.push("channel.0.m", 519);
        m.push("total_bits", 1557);
        let back = Manifest::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.channel_blocks(), vec![(3, 519)]);
        assert_eq!(back.total_bits(), Some(1557));
        assert!(Manifest::parse("nonsense").is_err());
    }
}
