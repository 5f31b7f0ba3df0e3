//! Four statistical tests in the style of NIST SP 800-22 for validating
//! extracted output: frequency (monobit), block frequency, runs, and
//! forward cumulative sums. Enough to catch pipeline bugs; a full battery
//! is delegated to external tooling.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::bits::BitBuffer;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub p_value: f64,
    pub passed: bool,
    pub alpha: f64,
}

impl TestReport {
    fn new(name: &str, p_value: f64) -> Self {
        TestReport {
            test_name: name.to_string(),
            p_value,
            passed: p_value >= DEFAULT_ALPHA,
            alpha: DEFAULT_ALPHA,
        }
    }
}

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Frequency (monobit) test: p = erfc(|S| / sqrt(2n)) with S = sum(2b - 1).
pub fn frequency_monobit(bits: &BitBuffer) -> Result<TestReport> {
    let n = bits.len();
    if n < 100 {
        return Err(Error::InsufficientData(format!(
            "monobit test needs >= 100 bits, got {n}"
        )));
    }
    let s = 2.0 * bits.count_ones() as f64 - n as f64;
    let p = erfc(s.abs() / (2.0 * n as f64).sqrt());
    Ok(TestReport::new("frequency_monobit", p))
}

/// Block frequency test: chi-square of per-block one-proportions,
/// p from the upper regularized incomplete gamma at N/2 degrees.
pub fn block_frequency(bits: &BitBuffer, block_len: usize) -> Result<TestReport> {
    if block_len < 20 {
        return Err(Error::InsufficientData(format!(
            "block length {block_len} below the minimum of 20"
        )));
    }
    let n_blocks = bits.len() / block_len;
    if n_blocks == 0 {
        return Err(Error::InsufficientData("no full block available".into()));
    }
    let mut chi2 = 0.0;
    for b in 0..n_blocks {
        let mut ones = 0usize;
        for i in 0..block_len {
            ones += bits.get(b * block_len + i) as usize;
        }
        let pi = ones as f64 / block_len as f64;
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * block_len as f64;
    let p = if chi2 <= 0.0 {
        1.0
    } else {
        gamma_ur(n_blocks as f64 / 2.0, chi2 / 2.0)
    };
    Ok(TestReport::new("block_frequency", p))
}

/// Runs test: compares the number of runs against its expectation under
/// the observed ones-fraction. Requires the monobit prerequisite.
pub fn runs_test(bits: &BitBuffer) -> Result<TestReport> {
    let n = bits.len();
    if n < 100 {
        return Err(Error::InsufficientData(format!(
            "runs test needs >= 100 bits, got {n}"
        )));
    }
    let nf = n as f64;
    let pi = bits.count_ones() as f64 / nf;
    if (pi - 0.5).abs() >= 2.0 / nf.sqrt() {
        return Err(Error::PrerequisiteFailed(format!(
            "ones fraction {pi} too far from 1/2 for the runs test"
        )));
    }
    let mut runs = 1u64;
    let mut prev = bits.get(0);
    for i in 1..n {
        let b = bits.get(i);
        if b != prev {
            runs += 1;
        }
        prev = b;
    }
    let expected = 2.0 * nf * pi * (1.0 - pi);
    let p = erfc((runs as f64 - expected).abs() / (2.0 * (2.0 * nf).sqrt() * pi * (1.0 - pi)));
    Ok(TestReport::new("runs", p))
}

/// Forward cumulative-sums test: maximal excursion of the +/-1 random walk,
/// p-value from the standard normal-CDF sum formula.
pub fn cumulative_sums(bits: &BitBuffer) -> Result<TestReport> {
    let n = bits.len();
    if n < 100 {
        return Err(Error::InsufficientData(format!(
            "cumulative sums test needs >= 100 bits, got {n}"
        )));
    }
    let mut s = 0i64;
    let mut z = 0i64;
    for i in 0..n {
        s += if bits.get(i) { 1 } else { -1 };
        z = z.max(s.abs());
    }
    let z = z as f64;
    let nf = n as f64;
    let sq = nf.sqrt();
    let lo1 = ((-nf / z + 1.0) / 4.0).floor() as i64;
    let hi1 = ((nf / z - 1.0) / 4.0).floor() as i64;
    let mut p = 1.0;
    for k in lo1..=hi1 {
        let k = k as f64;
        p -= phi((4.0 * k + 1.0) * z / sq) - phi((4.0 * k - 1.0) * z / sq);
    }
    let lo2 = ((-nf / z - 3.0) / 4.0).floor() as i64;
    for k in lo2..=hi1 {
        let k = k as f64;
        p += phi((4.0 * k + 3.0) * z / sq) - phi((4.0 * k + 1.0) * z / sq);
    }
    Ok(TestReport::new("cumulative_sums", p.clamp(0.0, 1.0)))
}

/// Run all four tests, mapping a failed runs-test prerequisite to a failing
/// report rather than an error (the sequence is certainly biased).
pub fn run_all(bits: &BitBuffer, block_len: usize) -> Result<Vec<TestReport>> {
    let mut reports = vec![
        frequency_monobit(bits)?,
        block_frequency(bits, block_len)?,
    ];
    match runs_test(bits) {
        Ok(r) => reports.push(r),
        Err(Error::PrerequisiteFailed(_)) => reports.push(TestReport {
            test_name: "runs".to_string(),
            p_value: 0.0,
            passed: false,
            alpha: DEFAULT_ALPHA,
        }),
        Err(e) => return Err(e),
    }
    reports.push(cumulative_sums(bits)?);
    Ok(reports)
}

/// Default block length for [`block_frequency`]: about 100 blocks, floored
/// at the minimum block size.
pub fn default_block_len(n_bits: usize) -> usize {
    (n_bits / 100).clamp(20, 10_000)
}
