//! Numerical adversary: check the analytic guessing-probability bound
//! against an explicit maximization over pure-state decompositions.

use sdi_qrng::bloch::{randomness_parameter, BinaryPovm, BlochVector, QubitState};
use sdi_qrng::entropy::guessing_prob_upper;
use sdi_qrng::oracle::{max_pguess_numeric, nxy_of, pguess_pure, soundness_sweep};

fn main() -> sdi_qrng::Result<()> {
    // one concrete instance
    let povm = BinaryPovm::new(0.45, BlochVector::new(0.1, 0.0, 0.8)?)?;
    let state = QubitState::new(BlochVector::new(0.7, 0.1, 0.05)?)?;
    let c = randomness_parameter(&povm.t, &state.bloch);
    let analytic = guessing_prob_upper(c)?;
    let numeric = max_pguess_numeric(&povm, &state, 64)?;
    println!("C = {c:.6}");
    println!("analytic bound   p_guess <= {analytic:.8}");
    println!("numeric maximum  p_guess  = {numeric:.8}");
    println!("margin = {:+.3e}", analytic - numeric);

    // pure-state closed form for the same measurement
    let dir = BlochVector::new(0.6, 0.0, 0.8)?;
    println!(
        "\npure state along (0.6, 0, 0.8): closed form {:.8}",
        pguess_pure(povm.a0, nxy_of(&povm, &dir)?)?
    );

    // randomized sweep: the analytic bound must dominate everywhere
    let verdicts = soundness_sweep(2_000, 42, 1e-9, 32)?;
    let worst = verdicts
        .iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .unwrap();
    println!(
        "\nsweep over {} random instances: {} violations, tightest margin {:+.3e} (sample {})",
        verdicts.len(),
        verdicts.iter().filter(|v| v.violated).count(),
        worst.margin,
        worst.index
    );
    Ok(())
}
