//! Monte-Carlo simulation of the prepare-and-measure experiment: random
//! input choice, imperfect state preparation, Poissonian photon statistics,
//! lossy detectors with dark counts, click assignment, and tallying.

use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::bits::BitBuffer;
use crate::bloch::{bloch_length_from_noise, BlochVector, QubitState, StateTriple};
use crate::error::{Error, Result};

/// Calibrated arm transmittances for reproducing the published rate table.
///
/// Mean photon numbers in the experiment are quoted after total loss, so the
/// per-arm factors below are relative to that loss reference and may exceed
/// one; see [`DetectorModel`].
pub const EFF_H_CALIBRATED: f64 = 1.4932743615627733;
pub const EFF_V_CALIBRATED: f64 = 1.1668725812374257;
/// Fraction of the total misalignment applied as a polar offset of the
/// generation state (calibrated; negative means toward the V pole).
pub const GEN_OFFSET_FRACTION: f64 = -0.7532445608523896;
/// Modulation-noise half-range of the second test state (calibrated).
pub const NOISE_RANGE_2_CALIBRATED: f64 = 0.5842161704921942;
pub const DARK_H_DEFAULT: f64 = 1.3e-6;
pub const DARK_V_DEFAULT: f64 = 1.6e-6;

/// Source-side model: setting probabilities, preparation imperfections.
///
/// Setting 0 is the generation state (equatorial up to `gen_polar_offset`),
/// settings 1 and 2 are the test states near the H and V poles. A round uses
/// setting 0 with probability `p_gen + p_test` (generation, or a test of the
/// same state with conditional probability p_test/(p_gen+p_test)), and each
/// of settings 1, 2 with probability `p_test`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub mu: f64,
    pub p_gen: f64,
    pub p_test: f64,
    /// Polar tilt of test state 1 away from +z (radians).
    pub misalign1: f64,
    /// Polar tilt of test state 2 away from -z (radians).
    pub misalign2: f64,
    pub noise_range0: f64,
    pub noise_range1: f64,
    pub noise_range2: f64,
    /// Residual azimuth phi' of the generation state.
    pub gen_azimuth: f64,
    /// Polar offset of the generation state off the equator (radians);
    /// imperfect phase modulation leaves the generation state slightly
    /// unbalanced between the poles.
    pub gen_polar_offset: f64,
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::InvalidModel("mu must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.p_gen) || !(0.0..=1.0).contains(&self.p_test) {
            return Err(Error::InvalidModel("probabilities outside [0,1]".into()));
        }
        if (self.p_gen + 3.0 * self.p_test - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel("p_gen + 3 p_test must equal 1".into()));
        }
        if self.misalign1 < 0.0 || self.misalign2 < 0.0 {
            return Err(Error::InvalidModel("misalignment angles must be >= 0".into()));
        }
        for nr in [self.noise_range0, self.noise_range1, self.noise_range2] {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&nr) {
                return Err(Error::InvalidModel("noise range outside [0, pi/2]".into()));
            }
        }
        if self.noise_range0 > self.noise_range1.min(self.noise_range2) + 1e-12 {
            return Err(Error::InvalidModel(
                "generation state may not be noisier than the test states".into(),
            ));
        }
        if self.gen_polar_offset.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(Error::InvalidModel("generation polar offset too large".into()));
        }
        Ok(())
    }

    /// Model of the tabletop experiment at a given intensity and total
    /// misalignment, with desk-scale test fraction `p_test`.
    pub fn experiment(mu: f64, misalignment: f64, p_test: f64) -> Self {
        SourceModel {
            mu,
            p_gen: 1.0 - 3.0 * p_test,
            p_test,
            misalign1: misalignment,
            misalign2: 0.0,
            noise_range0: 0.0,
            noise_range1: 0.0,
            noise_range2: NOISE_RANGE_2_CALIBRATED,
            gen_azimuth: 0.0,
            gen_polar_offset: GEN_OFFSET_FRACTION * misalignment,
        }
    }
}

/// Threshold-detector pair: independent arms, exponential no-click law.
///
/// `eff_h`/`eff_v` are arm transmittances relative to the loss reference at
/// which the mean photon number is quoted; because `mu` here is the
/// post-total-loss intensity, values above 1 simply mean the arm sits before
/// part of that reference loss, so the range is (0, 10] rather than (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub eff_h: f64,
    pub eff_v: f64,
    pub dark_h: f64,
    pub dark_v: f64,
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        for e in [self.eff_h, self.eff_v] {
            if !(e >= 0.0 && e <= 10.0) {
                return Err(Error::InvalidModel(format!("efficiency {e} outside [0,10]")));
            }
        }
        for d in [self.dark_h, self.dark_v] {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidModel(format!("dark rate {d} outside [0,1]")));
            }
        }
        Ok(())
    }

    /// Quantum efficiencies and dark rates as quoted for the two detectors.
    pub fn measured() -> Self {
        DetectorModel {
            eff_h: 0.106,
            eff_v: 0.137,
            dark_h: DARK_H_DEFAULT,
            dark_v: DARK_V_DEFAULT,
        }
    }

    /// Effective per-arm transmittances calibrated against the published
    /// rate table (mean photon numbers quoted after total loss).
    pub fn effective() -> Self {
        DetectorModel {
            eff_h: EFF_H_CALIBRATED,
            eff_v: EFF_V_CALIBRATED,
            dark_h: DARK_H_DEFAULT,
            dark_v: DARK_V_DEFAULT,
        }
    }
}

/// One protocol round: which state was sent and what came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub setting: u8,
    pub outcome: u8,
    pub is_test: bool,
}

/// Click tallies per setting over test rounds, plus the generation count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExpectationStats {
    pub count_b0: [u64; 3],
    pub count_b1: [u64; 3],
    pub n_gen_rounds: u64,
}

impl ExpectationStats {
    /// Observed expectation g_e = P(b=0) - P(b=1) for one setting.
    pub fn ge(&self, setting: usize) -> Option<f64> {
        let total = self.count_b0[setting] + self.count_b1[setting];
        if total == 0 {
            return None;
        }
        Some((self.count_b0[setting] as f64 - self.count_b1[setting] as f64) / total as f64)
    }

    pub fn test_rounds(&self) -> u64 {
        (0..3).map(|s| self.count_b0[s] + self.count_b1[s]).sum()
    }
}

/// The mean prepared state for a setting (noise folded into the Bloch
/// radius, not resampled per round).
pub fn lab_state(setting: u8, model: &SourceModel) -> Result<QubitState> {
    model.validate()?;
    let axis = state_axis(setting, model)?;
    let radius = match setting {
        0 => bloch_length_from_noise(model.noise_range0)?,
        1 => bloch_length_from_noise(model.noise_range1)?,
        _ => bloch_length_from_noise(model.noise_range2)?,
    };
    QubitState::new(axis.scale(radius))
}

/// Unit direction of the mean state for a setting.
fn state_axis(setting: u8, model: &SourceModel) -> Result<BlochVector> {
    match setting {
        0 => {
            let (so, co) = model.gen_polar_offset.sin_cos();
            let (sp, cp) = model.gen_azimuth.sin_cos();
            BlochVector::new(co * cp, co * sp, so)
        }
        1 => {
            let (s, c) = model.misalign1.sin_cos();
            BlochVector::new(s, 0.0, c)
        }
        2 => {
            let (s, c) = model.misalign2.sin_cos();
            BlochVector::new(s, 0.0, -c)
        }
        _ => Err(Error::InvalidModel(format!("setting {setting} not in 0..3"))),
    }
}

/// Per-gate click probabilities of the two arms for a given state.
pub fn click_probabilities(state: &QubitState, mu: f64, det: &DetectorModel) -> (f64, f64) {
    let q_h = (1.0 + state.bloch.z) / 2.0;
    let q_v = (1.0 - state.bloch.z) / 2.0;
    let p_h = 1.0 - (1.0 - det.dark_h) * (-mu * q_h * det.eff_h).exp();
    let p_v = 1.0 - (1.0 - det.dark_v) * (-mu * q_v * det.eff_v).exp();
    (p_h, p_v)
}

/// Outcome assignment: V-only clicks give 1; no-click, H-only and
/// double-click events all give 0.
#[inline]
pub fn assign_outcome(h_clicked: bool, v_clicked: bool) -> bool {
    v_clicked && !h_clicked
}

/// Expected g = P(b=0) - P(b=1) = 1 - 2 P(b=1) for a prepared state.
pub fn analytic_g(state: &QubitState, mu: f64, det: &DetectorModel) -> f64 {
    let (p_h, p_v) = click_probabilities(state, mu, det);
    1.0 - 2.0 * p_v * (1.0 - p_h)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimOptions {
    /// Resample the modulation-noise angle every round instead of using the
    /// mean (shrunk) state. Slower; for stress testing the mean-state model.
    pub per_round_noise: bool,
}

const SHARD_ROUNDS: u64 = 1 << 16;

#[inline]
fn unit_f64(r: u64) -> f64 {
    // 53 high bits -> [0, 1)
    (r >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Mix a cell or stream index into a master seed (splitmix64 finalizer).
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Run the full protocol for `n_rounds` rounds.
///
/// Rounds are processed in fixed-size shards; shard k draws from an
/// independent stream (master_seed, k) and every round consumes a fixed
/// number of samples, so results are reproducible regardless of how shards
/// are scheduled. Generation-round outcomes are appended to the raw buffer
/// in round order; test rounds are tallied into [`ExpectationStats`].
pub fn run_protocol(
    source: &SourceModel,
    det: &DetectorModel,
    n_rounds: u64,
    master_seed: u64,
    opts: &SimOptions,
) -> Result<(BitBuffer, ExpectationStats)> {
    source.validate()?;
    det.validate()?;
    if n_rounds == 0 {
        return Err(Error::InvalidModel("n_rounds must be >= 1".into()));
    }

    let states = [
        lab_state(0, source)?,
        lab_state(1, source)?,
        lab_state(2, source)?,
    ];
    // enforce the purity-ordering assumption of the security analysis
    StateTriple::new(states[0], states[1], states[2])?;
    let probs: [(f64, f64); 3] = [
        click_probabilities(&states[0], source.mu, det),
        click_probabilities(&states[1], source.mu, det),
        click_probabilities(&states[2], source.mu, det),
    ];

    let p_setting0 = source.p_gen + source.p_test;
    let p_test_given0 = if p_setting0 > 0.0 {
        source.p_test / p_setting0
    } else {
        0.0
    };

    // per-setting orthonormal frames for per-round noise sampling
    let frames: [(BlochVector, BlochVector, BlochVector); 3] = [
        noise_frame(0, source)?,
        noise_frame(1, source)?,
        noise_frame(2, source)?,
    ];
    let noise_ranges = [source.noise_range0, source.noise_range1, source.noise_range2];

    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());

    let mut raw = BitBuffer::with_capacity((n_rounds as f64 * p_setting0) as usize + 1024);
    let mut stats = ExpectationStats::default();

    let n_shards = n_rounds.div_ceil(SHARD_ROUNDS);
    for shard in 0..n_shards {
        let mut rng = rand_chacha::ChaCha8Rng::from_seed(key);
        rng.set_stream(shard);
        let rounds = SHARD_ROUNDS.min(n_rounds - shard * SHARD_ROUNDS);
        for _ in 0..rounds {
            let u_setting = unit_f64(rng.next_u64());
            let u_tag = unit_f64(rng.next_u64());
            let (setting, is_test) = if u_setting < p_setting0 {
                (0usize, u_tag < p_test_given0)
            } else if u_setting < p_setting0 + source.p_test {
                (1, true)
            } else {
                (2, true)
            };

            let (p_h, p_v) = if opts.per_round_noise {
                // sample a pure state in the noise cone around the mean axis
                let polar = 2.0 * noise_ranges[setting] * unit_f64(rng.next_u64());
                let azim = std::f64::consts::TAU * unit_f64(rng.next_u64());
                let (omega, e1, e2) = &frames[setting];
                let (sp, cp) = polar.sin_cos();
                let (sa, ca) = azim.sin_cos();
                let z = cp * omega.z + sp * (ca * e1.z + sa * e2.z);
                let state = QubitState {
                    bloch: BlochVector {
                        x: cp * omega.x + sp * (ca * e1.x + sa * e2.x),
                        y: cp * omega.y + sp * (ca * e1.y + sa * e2.y),
                        z,
                    },
                };
                click_probabilities(&state, source.mu, det)
            } else {
                probs[setting]
            };

            let h = unit_f64(rng.next_u64()) < p_h;
            let v = unit_f64(rng.next_u64()) < p_v;
            let b = assign_outcome(h, v);

            if is_test {
                if b {
                    stats.count_b1[setting] += 1;
                } else {
                    stats.count_b0[setting] += 1;
                }
            } else {
                raw.push(b);
                stats.n_gen_rounds += 1;
            }
        }
    }
    Ok((raw, stats))
}

/// Orthonormal frame (axis, e1, e2) around a setting's mean direction.
fn noise_frame(
    setting: u8,
    model: &SourceModel,
) -> Result<(BlochVector, BlochVector, BlochVector)> {
    let omega = state_axis(setting, model)?;
    let helper = if omega.z.abs() < 0.9 {
        BlochVector::new(0.0, 0.0, 1.0)?
    } else {
        BlochVector::new(1.0, 0.0, 0.0)?
    };
    let e1 = omega.cross(&helper).normalized()?;
    let e2 = omega.cross(&e1);
    Ok((omega, e1, e2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain_source(mu: f64) -> SourceModel {
        SourceModel {
            mu,
            p_gen: 0.7,
            p_test: 0.1,
            misalign1: 0.0,
            misalign2: 0.0,
            noise_range0: 0.0,
            noise_range1: 0.0,
            noise_range2: 0.0,
            gen_azimuth: 0.0,
            gen_polar_offset: 0.0,
        }
    }

    fn ideal_det() -> DetectorModel {
        DetectorModel {
            eff_h: 1.0,
            eff_v: 1.0,
            dark_h: 0.0,
            dark_v: 0.0,
        }
    }

    #[test]
    fn lab_state_examples() {
        let mut m = plain_source(0.58);
        let s1 = lab_state(1, &m).unwrap();
        assert!((s1.bloch.z - 1.0).abs() < 1e-12);
        let s0 = lab_state(0, &m).unwrap();
        assert!((s0.bloch.x - 1.0).abs() < 1e-12 && s0.bloch.z.abs() < 1e-12);
        m.misalign2 = std::f64::consts::PI / 28.0;
        let s2 = lab_state(2, &m).unwrap();
        assert!((s2.bloch.z - (-(std::f64::consts::PI / 28.0).cos())).abs() < 1e-12);
    }

    #[test]
    fn click_probability_examples() {
        let vac = QubitState::new(BlochVector::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        let (ph, pv) = click_probabilities(&vac, 0.0, &ideal_det());
        assert_eq!((ph, pv), (0.0, 0.0));
        let h = QubitState::new(BlochVector::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        let (ph, pv) = click_probabilities(&h, 1e6, &ideal_det());
        assert!(ph > 0.999999 && pv == 0.0);
        // hand-evaluated exponential at the measured H-arm efficiency
        let det = DetectorModel::measured();
        let (ph, _) = click_probabilities(&vac, 0.58, &det);
        assert!((ph - 0.030273477).abs() < 1e-6);
    }

    #[test]
    fn outcome_assignment() {
        assert!(assign_outcome(false, true));
        assert!(!assign_outcome(false, false));
        assert!(!assign_outcome(true, true));
        assert!(!assign_outcome(true, false));
    }

    #[test]
    fn determinism_and_conservation() {
        let src = plain_source(0.58);
        let det = DetectorModel::effective();
        let (raw1, st1) = run_protocol(&src, &det, 200_000, 42, &SimOptions::default()).unwrap();
        let (raw2, st2) = run_protocol(&src, &det, 200_000, 42, &SimOptions::default()).unwrap();
        assert_eq!(raw1, raw2);
        assert_eq!(st1, st2);
        assert_eq!(st1.n_gen_rounds + st1.test_rounds(), 200_000);
        assert_eq!(raw1.len() as u64, st1.n_gen_rounds);
        let (raw3, _) = run_protocol(&src, &det, 200_000, 43, &SimOptions::default()).unwrap();
        assert_ne!(raw1, raw3);
    }

    #[test]
    fn vacuum_dark_free_gives_all_zero() {
        let src = plain_source(0.0);
        let (raw, st) = run_protocol(&src, &ideal_det(), 50_000, 7, &SimOptions::default()).unwrap();
        assert_eq!(raw.count_ones(), 0);
        assert_eq!(st.count_b1, [0, 0, 0]);
    }

    #[test]
    fn single_generation_round() {
        let src = SourceModel {
            p_gen: 1.0,
            p_test: 0.0,
            ..plain_source(0.58)
        };
        let (raw, st) =
            run_protocol(&src, &ideal_det(), 1, 1, &SimOptions::default()).unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(st.test_rounds(), 0);
    }

    #[test]
    fn empirical_matches_analytic() {
        // |empirical - analytic| <= 5 sqrt(1/N_t) per setting
        let src = SourceModel {
            misalign1: 0.1,
            noise_range2: 0.3,
            gen_polar_offset: -0.05,
            ..plain_source(0.58)
        };
        let det = DetectorModel::effective();
        let n_rounds = 4_000_000u64;
        let (_, st) = run_protocol(&src, &det, n_rounds, 11, &SimOptions::default()).unwrap();
        for s in 0..3u8 {
            let state = lab_state(s, &src).unwrap();
            let expected = analytic_g(&state, src.mu, &det);
            let n_t = st.count_b0[s as usize] + st.count_b1[s as usize];
            assert!(n_t >= 100_000, "setting {s} undersampled: {n_t}");
            let tol = 5.0 / (n_t as f64).sqrt();
            let got = st.ge(s as usize).unwrap();
            assert!(
                (got - expected).abs() <= tol,
                "setting {s}: {got} vs {expected} (tol {tol})"
            );
        }
    }

    #[test]
    fn ideal_devices_hit_nominal_expectations() {
        // saturating intensity on ideal detectors: the correct arm always
        // clicks, so the test states pin ge1 -> 1 and ge2 -> -1
        let src = plain_source(50.0);
        let (_, st) = run_protocol(&src, &ideal_det(), 1_000_000, 3, &SimOptions::default())
            .unwrap();
        let tol = 5.0 / (st.count_b0[1] as f64 + st.count_b1[1] as f64).sqrt();
        assert!((st.ge(1).unwrap() - 1.0).abs() <= tol);
        assert!((st.ge(2).unwrap() + 1.0).abs() <= tol);
    }

    #[test]
    fn per_round_noise_statistically_matches_mean_state() {
        let src = SourceModel {
            noise_range1: 0.4,
            noise_range2: 0.4,
            noise_range0: 0.2,
            ..plain_source(0.58)
        };
        let det = DetectorModel::effective();
        let n_rounds = 3_000_000u64;
        let (_, mean_st) = run_protocol(&src, &det, n_rounds, 5, &SimOptions::default()).unwrap();
        let opts = SimOptions {
            per_round_noise: true,
        };
        let (_, noisy_st) = run_protocol(&src, &det, n_rounds, 6, &opts).unwrap();
        for s in 0..3 {
            let n_t = noisy_st.count_b0[s] + noisy_st.count_b1[s];
            let tol = 6.0 / (n_t as f64).sqrt();
            assert!(
                (mean_st.ge(s).unwrap() - noisy_st.ge(s).unwrap()).abs() <= tol,
                "setting {s} diverged"
            );
        }
    }

    #[test]
    fn invalid_models_rejected() {
        let mut src = plain_source(0.58);
        src.p_test = 0.2; // sums to 1.3
        assert!(src.validate().is_err());
        let mut det = ideal_det();
        det.dark_h = 1.5;
        assert!(det.validate().is_err());
        assert!(run_protocol(
            &plain_source(0.58),
            &ideal_det(),
            0,
            1,
            &SimOptions::default()
        )
        .is_err());
    }
}
