//! The analytic security chain: from observed expectations to a lower bound
//! on the randomness parameter C, an upper bound on the adversary's guessing
//! probability, and the finite-size extractable length.

use serde::{Deserialize, Serialize};

use crate::error::{AbortReason, Error, Result};

/// Finite-size accounting for one protocol run.
///
/// `epsilon` is the per-term failure probability; the run as a whole is
/// secure except with probability `7 * epsilon` (seven union-bound terms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityBudget {
    pub epsilon: f64,
    pub n_total: u64,
    pub n_gen: u64,
    pub n_test_per_state: u64,
    pub mu: f64,
    pub sys_freq_hz: f64,
}

impl SecurityBudget {
    pub fn new(
        epsilon: f64,
        n_total: u64,
        n_gen: u64,
        n_test_per_state: u64,
        mu: f64,
        sys_freq_hz: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidModel(format!("epsilon = {epsilon} not in (0,1)")));
        }
        if n_gen == 0 || n_test_per_state == 0 {
            return Err(Error::InvalidModel("empty generation or test budget".into()));
        }
        if n_gen.saturating_add(3 * n_test_per_state) > n_total {
            return Err(Error::InvalidModel(
                "n_gen + 3*n_test_per_state exceeds n_total".into(),
            ));
        }
        if !(mu >= 0.0) || !(sys_freq_hz > 0.0) {
            return Err(Error::InvalidModel("mu must be >= 0, sys_freq_hz > 0".into()));
        }
        Ok(SecurityBudget {
            epsilon,
            n_total,
            n_gen,
            n_test_per_state,
            mu,
            sys_freq_hz,
        })
    }

    /// Total composable failure probability, 7 epsilon.
    pub fn eps_total(&self) -> f64 {
        7.0 * self.epsilon
    }

    /// Poissonian probability of at most one photon in a pulse.
    pub fn eta(&self) -> f64 {
        eta_single_or_vacuum(self.mu).expect("mu validated at construction")
    }

    pub fn theta_t(&self) -> f64 {
        hoeffding_delta(self.epsilon, self.n_test_per_state).expect("budget validated")
    }

    pub fn theta_g(&self) -> f64 {
        hoeffding_delta(self.epsilon, self.n_gen).expect("budget validated")
    }
}

/// Outcome of the parameter-estimation and length computation for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub c_bound: f64,
    pub p_guess: f64,
    pub min_entropy_bits: f64,
    pub length_bits: u64,
    pub rate_bps: f64,
    pub aborted: Option<AbortReason>,
}

/// Lower bound on C from exact (single-photon, infinite-statistics)
/// expectations: sqrt((g1-g0)(g0-g2)). Aborts when the product is negative.
pub fn c_bound_ideal(g0: f64, g1: f64, g2: f64) -> Result<f64> {
    for g in [g0, g1, g2] {
        if !(-1.0..=1.0).contains(&g) {
            return Err(Error::InvalidModel(format!("expectation {g} outside [-1,1]")));
        }
    }
    let prod = (g1 - g0) * (g0 - g2);
    if prod < 0.0 {
        return Err(Error::Abort(AbortReason::NonPositiveWitness));
    }
    Ok(prod.sqrt().min(1.0))
}

/// Upper bound on the guessing probability given C:
/// 1 - (C/2)(1 - sqrt(1 - C^2)).
pub fn guessing_prob_upper(c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::InvalidModel(format!("c = {c} outside [0,1]")));
    }
    Ok(1.0 - (c / 2.0) * (1.0 - (1.0 - c * c).sqrt()))
}

/// Probability that a phase-randomized coherent pulse of mean photon number
/// mu carries at most one photon: (1 + mu) exp(-mu).
pub fn eta_single_or_vacuum(mu: f64) -> Result<f64> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidModel(format!("mu = {mu} must be >= 0")));
    }
    Ok((1.0 + mu) * (-mu).exp())
}

/// Chernoff-Hoeffding deviation allowance sqrt(ln(1/eps) / (2n)).
pub fn hoeffding_delta(epsilon: f64, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidModel("hoeffding_delta needs n > 0".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidModel(format!("epsilon = {epsilon} not in (0,1]")));
    }
    Ok(((1.0 / epsilon).ln() / (2.0 * n as f64)).sqrt())
}

/// Which prefactor multiplies the witness square root in the practical bound.
///
/// The two published forms share the same inner penalty terms but differ in
/// the prefactor; `Supplementary` (1/(eta + theta_t)) is the more
/// conservative and is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefactorVariant {
    #[default]
    Supplementary,
    MainText,
}

/// Core of the practical bound with the photon-statistics and fluctuation
/// terms passed explicitly. Exposed as a seam for unit tests; normal callers
/// use [`c_bound_practical`].
pub fn c_bound_practical_parts(
    ge0: f64,
    ge1: f64,
    ge2: f64,
    eta: f64,
    theta_t: f64,
    variant: PrefactorVariant,
) -> Result<f64> {
    for g in [ge0, ge1, ge2] {
        if !(-1.0..=1.0).contains(&g) {
            return Err(Error::InvalidModel(format!("expectation {g} outside [-1,1]")));
        }
    }
    let penalty = 2.0 * (1.0 - eta) + 4.0 * theta_t;
    // The worst case over the multiphoton/fluctuation box is attained on the
    // side of the larger gap; ties take the first branch (they coincide).
    let (f1, f2) = if ge0 >= 0.5 * (ge1 + ge2) {
        (ge1 - ge0 - penalty, ge0 - ge2)
    } else {
        (ge1 - ge0, ge0 - ge2 - penalty)
    };
    let prod = f1 * f2;
    if prod < 0.0 {
        return Err(Error::Abort(AbortReason::NonPositiveWitness));
    }
    let prefactor = match variant {
        PrefactorVariant::Supplementary => 1.0 / (eta + theta_t),
        PrefactorVariant::MainText => 1.0 / eta,
    };
    Ok((prefactor * prod.sqrt()).clamp(0.0, 1.0))
}

/// Lower bound on C from experimentally observed expectations, including
/// multiphoton worst cases and Hoeffding fluctuations.
pub fn c_bound_practical(
    ge0: f64,
    ge1: f64,
    ge2: f64,
    budget: &SecurityBudget,
    variant: PrefactorVariant,
) -> Result<f64> {
    c_bound_practical_parts(ge0, ge1, ge2, budget.eta(), budget.theta_t(), variant)
}

/// Length computation with the entropy-credit terms passed explicitly.
/// Seam for unit tests; normal callers use [`final_length`].
pub fn final_length_parts(
    c: f64,
    n_gen: u64,
    eta: f64,
    theta_g: f64,
    epsilon: f64,
    n_total: u64,
    sys_freq_hz: f64,
) -> Result<EntropyReport> {
    let p_guess = guessing_prob_upper(c)?;
    let credit = (n_gen as f64) * (eta + theta_g);
    let min_entropy_bits = (-p_guess.log2() * credit).max(0.0);
    let raw_len = min_entropy_bits - 2.0 * (1.0 / (2.0 * epsilon)).log2();
    let (length_bits, aborted) = if raw_len >= 1.0 {
        (raw_len.floor() as u64, None)
    } else {
        (0, Some(AbortReason::NegativeLength))
    };
    Ok(EntropyReport {
        c_bound: c,
        p_guess,
        min_entropy_bits,
        length_bits,
        rate_bps: length_bits as f64 * sys_freq_hz / n_total as f64,
        aborted,
    })
}

/// Finite-size extractable length and rate for a certified C.
///
/// The published formula credits N_g (eta + theta_g) single-or-vacuum rounds;
/// `conservative_eta` switches to the worst-case reading (eta - theta_g).
pub fn final_length(c: f64, budget: &SecurityBudget, conservative_eta: bool) -> Result<EntropyReport> {
    let theta_g = if conservative_eta {
        -budget.theta_g()
    } else {
        budget.theta_g()
    };
    final_length_parts(
        c,
        budget.n_gen,
        budget.eta(),
        theta_g,
        budget.epsilon,
        budget.n_total,
        budget.sys_freq_hz,
    )
}

/// Worst-case single-photon-subspace expectation given the raw expectation
/// g' and the probability pr_le1 of at most one photon:
/// (g' -/+ (1 - pr_le1)) / pr_le1, clamped to [-1, 1].
pub fn multiphoton_adjust(g_prime: f64, pr_le1: f64, lower: bool) -> Result<f64> {
    if !(-1.0..=1.0).contains(&g_prime) {
        return Err(Error::InvalidModel(format!("g' = {g_prime} outside [-1,1]")));
    }
    if !(pr_le1 > 0.0 && pr_le1 <= 1.0) {
        return Err(Error::InvalidModel(format!("pr_le1 = {pr_le1} not in (0,1]")));
    }
    let shift = 1.0 - pr_le1;
    let adjusted = if lower {
        (g_prime - shift) / pr_le1
    } else {
        (g_prime + shift) / pr_le1
    };
    Ok(adjusted.clamp(-1.0, 1.0))
}
