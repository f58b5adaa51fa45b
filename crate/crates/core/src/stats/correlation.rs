use std::fmt::Write as _;

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Splits a bitstream into consecutive `word_bits`-bit unsigned values.
///
/// Bit `i` of a group becomes bit `i` of the value, so the packed bytes
/// `34 12` decimalize to `0x1234`.
pub fn decimalize(bits: &Bits, word_bits: usize) -> Result<Vec<u32>> {
    if word_bits == 0 || word_bits > 32 {
        return Err(Error::usage(format!("word width {word_bits} not in 1..=32")));
    }
    if bits.len() % word_bits != 0 {
        return Err(Error::usage(format!(
            "{} bits do not split into {word_bits}-bit words",
            bits.len()
        )));
    }
    let count = bits.len() / word_bits;
    if 64 % word_bits == 0 {
        let per_word = 64 / word_bits;
        let mask = if word_bits == 32 { u32::MAX as u64 } else { (1u64 << word_bits) - 1 };
        return Ok((0..count)
            .map(|i| ((bits.words()[i / per_word] >> ((i % per_word) * word_bits)) & mask) as u32)
            .collect());
    }
    Ok((0..count)
        .map(|i| {
            (0..word_bits).fold(0u32, |acc, j| acc | ((bits.get(i * word_bits + j) as u32) << j))
        })
        .collect())
}

/// Normalized correlation coefficients indexed by lag.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
    pub n_points: usize,
}

impl CorrelationSeries {
    pub fn at(&self, lag: i64) -> Option<f64> {
        self.lags.iter().position(|&l| l == lag).map(|i| self.values[i])
    }

    fn off_zero(&self) -> impl Iterator<Item = f64> + '_ {
        self.lags
            .iter()
            .zip(&self.values)
            .filter(|(l, _)| **l != 0)
            .map(|(_, v)| v.abs())
    }

    /// Largest `|ρ(τ)|` over `τ ≠ 0`.
    pub fn max_abs_off_zero(&self) -> f64 {
        self.off_zero().fold(0.0, f64::max)
    }

    pub fn mean_abs_off_zero(&self) -> f64 {
        let (sum, n) = self.off_zero().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }

    /// Lag with the largest absolute coefficient.
    pub fn peak_lag(&self) -> i64 {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i].abs() > self.values[best].abs() {
                best = i;
            }
        }
        self.lags[best]
    }

    /// Tab-separated `lag value` rows with a header.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("lag\tvalue\n");
        for (l, v) in self.lags.iter().zip(&self.values) {
            let _ = writeln!(out, "{l}\t{v:.9}");
        }
        out
    }
}

fn centered<T: Copy + Into<f64>>(x: &[T]) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mean = x.iter().map(|&v| v.into()).sum::<f64>() / n;
    let d: Vec<f64> = x.iter().map(|&v| v.into() - mean).collect();
    let ss = d.iter().map(|v| v * v).sum();
    (d, ss)
}

fn lagged_dot(a: &[f64], b: &[f64], lag: usize) -> f64 {
    a[..a.len() - lag].iter().zip(&b[lag..]).map(|(x, y)| x * y).sum()
}

/// Autocorrelation for lags `0..=max_lag`, normalized by the total sum of
/// squares (the biased estimator).
pub fn acf<T: Copy + Into<f64>>(x: &[T], max_lag: usize) -> Result<CorrelationSeries> {
    if x.len() <= max_lag {
        return Err(Error::usage(format!(
            "{} points cannot support lag {max_lag}",
            x.len()
        )));
    }
    let (d, ss) = centered(x);
    if !(ss > 0.0) {
        return Err(Error::Degenerate("autocorrelation of a constant sequence".into()));
    }
    let values = (0..=max_lag).map(|lag| lagged_dot(&d, &d, lag) / ss).collect();
    Ok(CorrelationSeries {
        lags: (0..=max_lag as i64).collect(),
        values,
        n_points: x.len(),
    })
}

/// Cross-correlation for lags `-max_lag..=max_lag`.
///
/// The value at lag `τ ≥ 0` pairs `x_t` with `y_{t+τ}`; a copy of `x`
/// delayed by `s` samples peaks at lag `s`.
pub fn ccf<T: Copy + Into<f64>>(x: &[T], y: &[T], max_lag: usize) -> Result<CorrelationSeries> {
    if x.len() != y.len() {
        return Err(Error::usage(format!(
            "cross-correlation of sequences with lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() <= max_lag {
        return Err(Error::usage(format!(
            "{} points cannot support lag {max_lag}",
            x.len()
        )));
    }
    let (dx, sx) = centered(x);
    let (dy, sy) = centered(y);
    if !(sx > 0.0) || !(sy > 0.0) {
        return Err(Error::Degenerate("cross-correlation with a constant sequence".into()));
    }
    let norm = (sx * sy).sqrt();
    let mut lags = Vec::with_capacity(2 * max_lag + 1);
    let mut values = Vec::with_capacity(2 * max_lag + 1);
    for lag in -(max_lag as i64)..=max_lag as i64 {
        let v = if lag >= 0 {
            lagged_dot(&dx, &dy, lag as usize)
        } else {
            lagged_dot(&dy, &dx, (-lag) as usize)
        };
        lags.push(lag);
        values.push(v / norm);
    }
    Ok(CorrelationSeries {
        lags,
        values,
        n_points: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn decimalize_examples() {
        assert_eq!(decimalize(&Bits::zeros(16), 16).unwrap(), vec![0]);
        assert_eq!(decimalize(&Bits::ones(16), 16).unwrap(), vec![65535]);
        let b = Bits::from_bytes(&[0x34, 0x12], 16).unwrap();
        assert_eq!(decimalize(&b, 16).unwrap(), vec![0x1234]);
        assert!(decimalize(&Bits::zeros(17), 16).is_err());
    }

    #[test]
    fn decimalize_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = Bits::from_fn(3 * 5 * 64, |_| rng.random());
        for w in [3usize, 5, 8, 16, 32] {
            let fast = decimalize(&b, w).unwrap();
            for (i, v) in fast.iter().enumerate() {
                let slow = (0..w).fold(0u32, |a, j| a | ((b.get(i * w + j) as u32) << j));
                assert_eq!(*v, slow);
            }
        }
    }

    #[test]
    fn acf_basics() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = acf(&x, 3).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-12);
        assert!((s.values[1] + 0.999).abs() < 1e-9);
        assert!(matches!(acf(&[3.0; 10], 2), Err(Error::Degenerate(_))));
        assert!(acf(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn ccf_shift_peak() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        let same = ccf(&x, &x, 5).unwrap();
        assert!((same.at(0).unwrap() - 1.0).abs() < 1e-12);

        let s = 7;
        let y: Vec<f64> = (0..x.len()).map(|t| if t >= s { x[t - s] } else { 0.5 }).collect();
        let c = ccf(&x, &y, 20).unwrap();
        assert_eq!(c.peak_lag(), s as i64);
        assert!(ccf(&x, &x[..10], 2).is_err());
    }
}
