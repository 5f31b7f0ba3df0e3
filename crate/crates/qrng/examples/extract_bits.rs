//! Toeplitz extraction: hash a biased simulated stream down to its
//! certified entropy, with seed accounting.

use rand_core::{RngCore, SeedableRng};
use sdi_qrng::bits::BitBuffer;
use sdi_qrng::sim::{run_protocol, DetectorModel, SimOptions, SourceModel};
use sdi_qrng::toeplitz::{extract, extract_naive, ledger, required_seed_length, ToeplitzSpec};

fn main() -> sdi_qrng::Result<()> {
    // balanced-arm source at the intensity that maximizes output entropy:
    // P(b=1) = 1/4, so ~0.415 bits of min-entropy per raw bit
    let source = SourceModel {
        mu: 2.0 * std::f64::consts::LN_2,
        p_gen: 1.0,
        p_test: 0.0,
        misalign1: 0.0,
        misalign2: 0.0,
        noise_range0: 0.0,
        noise_range1: 0.0,
        noise_range2: 0.0,
        gen_azimuth: 0.0,
        gen_polar_offset: 0.0,
    };
    let det = DetectorModel {
        eff_h: 1.0,
        eff_v: 1.0,
        dark_h: 0.0,
        dark_v: 0.0,
    };
    let (raw, _) = run_protocol(&source, &det, 1 << 20, 7, &SimOptions::default())?;
    println!(
        "raw: {} bits, ones fraction {:.4}",
        raw.len(),
        raw.count_ones() as f64 / raw.len() as f64
    );

    // extract at ratio 1/4, comfortably below the entropy rate
    let (n, m) = (4096usize, 1024usize);
    let seed_len = required_seed_length(n, m)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let seed = BitBuffer::from_bits((0..seed_len).map(|_| rng.next_u64() & 1 == 1));
    let spec = ToeplitzSpec::new(n, m, seed)?;

    let n_blocks = raw.len() / n;
    let mut out = BitBuffer::with_capacity(n_blocks * m);
    for b in 0..n_blocks {
        let hashed = extract(&raw.slice(b * n, n)?, &spec)?;
        for i in 0..m {
            out.push(hashed.get(i));
        }
    }
    println!(
        "extracted: {} bits, ones fraction {:.4}",
        out.len(),
        out.count_ones() as f64 / out.len() as f64
    );

    // the naive path is the correctness oracle for the word-level one
    let block0 = raw.slice(0, n)?;
    assert_eq!(extract(&block0, &spec)?, extract_naive(&block0, &spec)?);
    println!("naive and accelerated paths agree on block 0");

    let led = ledger(0, out.len() as u64, seed_len as u64);
    println!(
        "ledger: produced {} - seed {} = net {:+} bits",
        led.bits_produced, led.bits_consumed_extraction, led.net_expansion
    );
    Ok(())
}
