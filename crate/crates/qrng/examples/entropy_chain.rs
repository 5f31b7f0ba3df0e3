//! The full analytic chain from observed expectations to certified bits:
//! C lower bound -> guessing probability -> finite-size length and rate.

use sdi_qrng::entropy::{
    c_bound_practical, eta_single_or_vacuum, final_length, guessing_prob_upper, hoeffding_delta,
    PrefactorVariant, SecurityBudget,
};

fn main() -> sdi_qrng::Result<()> {
    // full-scale budget: 10^10 pulses at 10 MHz, 9e4 test rounds per state,
    // total failure probability 7e-10
    let budget = SecurityBudget::new(
        1e-10,
        10_000_000_000,
        10_000_000_000 - 270_000,
        90_000,
        0.58,
        1e7,
    )?;
    println!("eta      = {:.6}  (P[n <= 1] at mu = {})", budget.eta(), budget.mu);
    println!("theta_t  = {:.6}", budget.theta_t());
    println!(
        "theta_g  = {:.3e}   eps_total = {:.1e}",
        budget.theta_g(),
        budget.eps_total()
    );
    println!(
        "sanity: hoeffding_delta = {:.6}, eta = {:.6}",
        hoeffding_delta(budget.epsilon, budget.n_test_per_state)?,
        eta_single_or_vacuum(budget.mu)?
    );

    // plausible observed expectations for this operating point
    let (ge0, ge1, ge2) = (0.3065, 0.6624, -0.0326);
    let c = c_bound_practical(ge0, ge1, ge2, &budget, PrefactorVariant::Supplementary)?;
    println!("\nobserved ge = ({ge0}, {ge1}, {ge2})");
    println!("C >= {c:.6}");
    println!("p_guess <= {:.6}", guessing_prob_upper(c)?);

    let report = final_length(c, &budget, false)?;
    println!(
        "l = {} bits over {} pulses -> {:.1} bps",
        report.length_bits, budget.n_total, report.rate_bps
    );

    // the less conservative main-text prefactor for comparison
    let c_main = c_bound_practical(ge0, ge1, ge2, &budget, PrefactorVariant::MainText)?;
    println!("main-text prefactor variant: C >= {c_main:.6}");
    Ok(())
}
