//! Native subset of the standard randomness battery: frequency, block
//! frequency, runs and cumulative sums, with the reference p-value formulas.
//! The full battery is run externally on exported bitstreams.

use std::fmt;

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::bits::Bits;
use crate::error::{Error, Result};

pub const MIN_BITS: usize = 100;

fn check_len(bits: &Bits, min: usize, test: &str) -> Result<()> {
    if bits.len() < min {
        return Err(Error::usage(format!(
            "{test} needs at least {min} bits, got {}",
            bits.len()
        )));
    }
    Ok(())
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Frequency (monobit) test: `p = erfc(|S_n| / √(2n))`.
pub fn monobit_test(bits: &Bits) -> Result<f64> {
    check_len(bits, MIN_BITS, "monobit test")?;
    let n = bits.len() as f64;
    let s = 2.0 * bits.count_ones() as f64 - n;
    Ok(erfc(s.abs() / (2.0 * n).sqrt()).clamp(0.0, 1.0))
}

/// Frequency within blocks of `block_len` bits; a trailing partial block is ignored.
pub fn block_frequency_test(bits: &Bits, block_len: usize) -> Result<f64> {
    check_len(bits, MIN_BITS, "block frequency test")?;
    if block_len < 2 || block_len > bits.len() {
        return Err(Error::usage(format!(
            "block length {block_len} unusable for {} bits",
            bits.len()
        )));
    }
    let blocks = bits.len() / block_len;
    let chi2: f64 = (0..blocks)
        .map(|b| {
            let ones = bits.slice(b * block_len, block_len).count_ones();
            let pi = ones as f64 / block_len as f64 - 0.5;
            pi * pi
        })
        .sum::<f64>()
        * 4.0
        * block_len as f64;
    // Q(a, 0) = 1; the library rejects x = 0.
    if chi2 <= 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_ur(blocks as f64 / 2.0, chi2 / 2.0).clamp(0.0, 1.0))
}

/// Runs test. Returns 0 when the frequency prerequisite already fails.
pub fn runs_test(bits: &Bits) -> Result<f64> {
    check_len(bits, MIN_BITS, "runs test")?;
    let n = bits.len() as f64;
    let pi = bits.count_ones() as f64 / n;
    if (pi - 0.5).abs() >= 2.0 / n.sqrt() {
        return Ok(0.0);
    }
    let transitions = bits.xor(&shifted_by_one(bits)).count_ones();
    let v = 1.0 + transitions as f64;
    let q = pi * (1.0 - pi);
    let p = erfc((v - 2.0 * n * q).abs() / (2.0 * (2.0 * n).sqrt() * q));
    Ok(p.clamp(0.0, 1.0))
}

// b_{i} ^ b_{i+1} for i < n-1, with the last position XORed against itself.
fn shifted_by_one(bits: &Bits) -> Bits {
    let mut s = bits.slice(1, bits.len() - 1);
    s.push(bits.get(bits.len() - 1));
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CusumMode {
    Forward,
    Backward,
}

/// Cumulative sums test over the ±1 random walk.
pub fn cusum_test(bits: &Bits, mode: CusumMode) -> Result<f64> {
    check_len(bits, MIN_BITS, "cumulative sums test")?;
    let n = bits.len() as i64;
    let mut s = 0i64;
    let mut z = 0i64;
    let mut step = |b: bool| {
        s += if b { 1 } else { -1 };
        z = z.max(s.abs());
    };
    match mode {
        CusumMode::Forward => bits.iter().for_each(&mut step),
        CusumMode::Backward => (0..bits.len()).rev().for_each(|i| step(bits.get(i))),
    }
    let sqrt_n = (n as f64).sqrt();
    let zf = z as f64;
    // Summation bounds use truncating integer division, as in the reference code.
    let mut sum1 = 0.0;
    for k in ((-n / z + 1) / 4)..=((n / z - 1) / 4) {
        sum1 += phi((4 * k + 1) as f64 * zf / sqrt_n) - phi((4 * k - 1) as f64 * zf / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in ((-n / z - 3) / 4)..=((n / z - 1) / 4) {
        sum2 += phi((4 * k + 3) as f64 * zf / sqrt_n) - phi((4 * k + 1) as f64 * zf / sqrt_n);
    }
    Ok((1.0 - sum1 + sum2).clamp(0.0, 1.0))
}

/// One of the natively implemented tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NativeTest {
    Monobit,
    BlockFrequency { block_len: usize },
    Runs,
    Cusum(CusumMode),
}

impl NativeTest {
    /// Monobit, block frequency (M = 128), runs, forward and backward cusum.
    pub fn standard_set() -> Vec<NativeTest> {
        vec![
            NativeTest::Monobit,
            NativeTest::BlockFrequency { block_len: 128 },
            NativeTest::Runs,
            NativeTest::Cusum(CusumMode::Forward),
            NativeTest::Cusum(CusumMode::Backward),
        ]
    }

    pub fn run(&self, bits: &Bits) -> Result<f64> {
        match *self {
            NativeTest::Monobit => monobit_test(bits),
            NativeTest::BlockFrequency { block_len } => block_frequency_test(bits, block_len),
            NativeTest::Runs => runs_test(bits),
            NativeTest::Cusum(mode) => cusum_test(bits, mode),
        }
    }
}

impl fmt::Display for NativeTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NativeTest::Monobit => f.write_str("monobit"),
            NativeTest::BlockFrequency { block_len } => write!(f, "block_frequency_m{block_len}"),
            NativeTest::Runs => f.write_str("runs"),
            NativeTest::Cusum(CusumMode::Forward) => f.write_str("cusum_forward"),
            NativeTest::Cusum(CusumMode::Backward) => f.write_str("cusum_backward"),
        }
    }
}

/// Outcome of one test applied to many sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub test_name: String,
    pub p_values: Vec<f64>,
    pub alpha: f64,
    pub pass_proportion: f64,
    /// `(1-α) ± 3·√(α(1-α)/count)`, upper end capped at 1.
    pub confidence_interval: (f64, f64),
}

impl TestReport {
    pub fn within_interval(&self) -> bool {
        self.pass_proportion >= self.confidence_interval.0
            && self.pass_proportion <= self.confidence_interval.1
    }

    pub fn passed(&self) -> usize {
        self.p_values.iter().filter(|&&p| p >= self.alpha).count()
    }

    pub fn to_kv(&self) -> String {
        format!(
            "test: {}\nsequences: {}\nalpha: {}\npassed: {}\npass_proportion: {:.6}\n\
             interval_lo: {:.6}\ninterval_hi: {:.6}\nwithin_interval: {}\n",
            self.test_name,
            self.p_values.len(),
            self.alpha,
            self.passed(),
            self.pass_proportion,
            self.confidence_interval.0,
            self.confidence_interval.1,
            self.within_interval()
        )
    }
}

/// Proportion interval for `count` sequences at significance `alpha`.
pub fn proportion_interval(alpha: f64, count: usize) -> (f64, f64) {
    let p = 1.0 - alpha;
    let half = 3.0 * (alpha * (1.0 - alpha) / count as f64).sqrt();
    (p - half, (p + half).min(1.0))
}

pub fn pass_rate(test_name: &str, p_values: Vec<f64>, alpha: f64) -> Result<TestReport> {
    if p_values.is_empty() {
        return Err(Error::usage("pass rate of zero p-values"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::usage(format!("alpha {alpha} not in (0, 1)")));
    }
    let passed = p_values.iter().filter(|&&p| p >= alpha).count();
    Ok(TestReport {
        test_name: test_name.to_string(),
        pass_proportion: passed as f64 / p_values.len() as f64,
        confidence_interval: proportion_interval(alpha, p_values.len()),
        p_values,
        alpha,
    })
}

/// Runs every test over consecutive `sequence_bits`-bit sequences of
/// `stream`; a trailing partial sequence is dropped.
pub fn run_suite(stream: &Bits, sequence_bits: usize, tests: &[NativeTest], alpha: f64) -> Result<Vec<TestReport>> {
    if sequence_bits == 0 || stream.len() < sequence_bits {
        return Err(Error::usage(format!(
            "stream of {} bits holds no {sequence_bits}-bit sequence",
            stream.len()
        )));
    }
    let sequences: Vec<Bits> = (0..stream.len() / sequence_bits)
        .map(|i| stream.slice(i * sequence_bits, sequence_bits))
        .collect();
    tests
        .iter()
        .map(|t| {
            let p = sequences.iter().map(|s| t.run(s)).collect::<Result<Vec<_>>>()?;
            pass_rate(&t.to_string(), p, alpha)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Bits {
        s.parse().unwrap()
    }

    #[test]
    fn monobit_edges() {
        let balanced = Bits::from_fn(1000, |i| i % 2 == 0);
        assert_eq!(monobit_test(&balanced).unwrap(), 1.0);
        assert!(monobit_test(&Bits::zeros(1000)).unwrap() < 1e-100);
        assert!(monobit_test(&Bits::zeros(99)).is_err());
    }

    #[test]
    fn perfectly_balanced_blocks() {
        let balanced = Bits::from_fn(1000, |i| i % 2 == 0);
        assert_eq!(block_frequency_test(&balanced, 10).unwrap(), 1.0);
    }

    #[test]
    fn periodic_and_constant_rejected() {
        let alt = Bits::from_fn(1000, |i| i % 2 == 0);
        assert!(runs_test(&alt).unwrap() < 0.01);
        assert!(block_frequency_test(&Bits::ones(1000), 10).unwrap() < 0.01);
        assert_eq!(runs_test(&Bits::ones(1000)).unwrap(), 0.0);
        assert!(block_frequency_test(&alt, 1).is_err());
    }

    #[test]
    fn interval_for_thousand() {
        let (lo, hi) = proportion_interval(0.01, 1000);
        assert!((lo - 0.980561).abs() < 1e-6);
        assert!((hi - 0.999439).abs() < 1e-6);
    }

    #[test]
    fn pass_rate_extremes() {
        assert_eq!(pass_rate("t", vec![1.0; 10], 0.01).unwrap().pass_proportion, 1.0);
        assert_eq!(pass_rate("t", vec![0.0; 10], 0.01).unwrap().pass_proportion, 0.0);
        assert!(pass_rate("t", vec![], 0.01).is_err());
        let r = pass_rate("t", vec![0.5, 0.005, 0.01], 0.01).unwrap();
        assert_eq!(r.passed(), 2);
    }

    #[test]
    fn short_reference_strings() {
        // Worked examples for the shorter-than-minimum inputs go through
        // the same formulas once the length gate is lifted.
        let b = bits("1011010101");
        let n = b.len() as f64;
        let s = 2.0 * b.count_ones() as f64 - n;
        assert!((erfc(s.abs() / (2.0 * n).sqrt()) - 0.527089).abs() < 1e-6);
    }
}
