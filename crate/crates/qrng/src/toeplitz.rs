//! Two-universal Toeplitz-matrix extraction over GF(2).
//!
//! Convention: the m x n matrix T is defined by a seed of n + m - 1 bits via
//! T[i][j] = seed[i + (n-1) - j]; the first row reads seed[n-1 .. n+m-2]
//! backwards along columns, the first column walks seed upward from n-1.
//! Any consistent convention is two-universal; this one is fixed so that
//! independent implementations can reproduce outputs bit-exactly.

use serde::{Deserialize, Serialize};

use crate::bits::BitBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ToeplitzSpec {
    n_in: usize,
    m_out: usize,
    seed: BitBuffer,
}

impl ToeplitzSpec {
    pub fn new(n_in: usize, m_out: usize, seed: BitBuffer) -> Result<Self> {
        let need = required_seed_length(n_in, m_out)?;
        if seed.len() != need {
            return Err(Error::InvalidLength(format!(
                "seed has {} bits, Toeplitz {m_out}x{n_in} needs {need}",
                seed.len()
            )));
        }
        Ok(ToeplitzSpec { n_in, m_out, seed })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn m_out(&self) -> usize {
        self.m_out
    }

    pub fn seed(&self) -> &BitBuffer {
        &self.seed
    }
}

/// Seed bits needed for an m x n Toeplitz matrix: n + m - 1.
pub fn required_seed_length(n_in: usize, m_out: usize) -> Result<usize> {
    if m_out == 0 || n_in == 0 {
        return Err(Error::InvalidLength("empty extractor dimensions".into()));
    }
    if m_out > n_in {
        return Err(Error::InvalidLength(format!(
            "cannot extract {m_out} bits from {n_in} input bits"
        )));
    }
    Ok(n_in + m_out - 1)
}

/// Reference implementation: literal matrix-vector product over GF(2).
/// Kept dumb on purpose; the accelerated path must agree with it bit-exactly.
pub fn extract_naive(input: &BitBuffer, spec: &ToeplitzSpec) -> Result<BitBuffer> {
    check_input(input, spec)?;
    let (n, m) = (spec.n_in, spec.m_out);
    let mut out = BitBuffer::with_capacity(m);
    for i in 0..m {
        let mut acc = false;
        for j in 0..n {
            acc ^= spec.seed.get(i + (n - 1) - j) && input.get(j);
        }
        out.push(acc);
    }
    Ok(out)
}

/// Word-accelerated extraction: for every set input bit j, XOR the m-bit
/// window of the seed starting at offset (n-1) - j into the output.
pub fn extract(input: &BitBuffer, spec: &ToeplitzSpec) -> Result<BitBuffer> {
    check_input(input, spec)?;
    let (n, m) = (spec.n_in, spec.m_out);
    let m_words = m.div_ceil(64);
    let mut seed_words = spec.seed.to_words();
    // pad so that every window read of m_words + 1 words stays in bounds
    seed_words.resize(seed_words.len() + m_words + 1, 0);
    let mut out = vec![0u64; m_words];
    for (wi, mut word) in input.to_words().into_iter().enumerate() {
        while word != 0 {
            let j = wi * 64 + word.trailing_zeros() as usize;
            word &= word - 1;
            let off = (n - 1) - j;
            let (q, r) = (off / 64, off % 64);
            if r == 0 {
                for k in 0..m_words {
                    out[k] ^= seed_words[q + k];
                }
            } else {
                for k in 0..m_words {
                    out[k] ^= (seed_words[q + k] >> r) | (seed_words[q + k + 1] << (64 - r));
                }
            }
        }
    }
    Ok(BitBuffer::from_words(&out, m))
}

fn check_input(input: &BitBuffer, spec: &ToeplitzSpec) -> Result<()> {
    if input.len() != spec.n_in {
        return Err(Error::InvalidLength(format!(
            "input has {} bits, extractor expects {}",
            input.len(),
            spec.n_in
        )));
    }
    Ok(())
}

/// Randomness bookkeeping for one run: seed bits spent on extraction and on
/// test-state selection (35 position bits + 2 state bits per test state)
/// against bits produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedLedger {
    pub bits_consumed_extraction: u64,
    pub bits_consumed_test_selection: u64,
    pub bits_produced: u64,
    pub net_expansion: i64,
}

pub const TEST_SELECTION_BITS: u64 = 35 + 2;

pub fn ledger(n_test_states: u64, l_bits: u64, seed_len: u64) -> SeedLedger {
    let selection = TEST_SELECTION_BITS * n_test_states;
    SeedLedger {
        bits_consumed_extraction: seed_len,
        bits_consumed_test_selection: selection,
        bits_produced: l_bits,
        net_expansion: l_bits as i64 - seed_len as i64 - selection as i64,
    }
}
