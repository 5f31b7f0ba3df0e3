//! Run configuration: a flat JSON document covering the source, detector
//! and security-budget parameters plus run switches. Unknown keys are
//! rejected; command-line flags override file values; the QRNG_SEED
//! environment variable overrides the master seed.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entropy::{PrefactorVariant, SecurityBudget};
use crate::error::{Error, Result};
use crate::sim::{
    DetectorModel, SimOptions, SourceModel, DARK_H_DEFAULT, DARK_V_DEFAULT, EFF_H_CALIBRATED,
    EFF_V_CALIBRATED, GEN_OFFSET_FRACTION, NOISE_RANGE_2_CALIBRATED,
};

pub const QRNG_SEED_ENV: &str = "QRNG_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    // source model
    pub mu: f64,
    pub p_gen: f64,
    pub p_test: f64,
    pub misalign1: f64,
    pub misalign2: f64,
    pub noise_range0: f64,
    pub noise_range1: f64,
    pub noise_range2: f64,
    pub gen_azimuth: f64,
    pub gen_polar_offset: f64,
    // detector model
    pub eff_h: f64,
    pub eff_v: f64,
    pub dark_h: f64,
    pub dark_v: f64,
    // security budget (analytic; independent of the simulated round count)
    pub epsilon: f64,
    pub n_total: u64,
    pub n_test_per_state: u64,
    pub sys_freq_hz: f64,
    // run parameters
    pub n_rounds: u64,
    pub master_seed: u64,
    // switches
    pub conservative_eta: bool,
    pub prefactor_variant: PrefactorVariant,
    pub per_round_noise_sampling: bool,
}

impl Default for RunConfig {
    /// The tabletop experiment at its best operating point (mu = 0.58,
    /// total misalignment pi/14), with a desk-scale simulation budget.
    fn default() -> Self {
        let misalignment = std::f64::consts::PI / 14.0;
        RunConfig {
            mu: 0.58,
            p_gen: 0.7,
            p_test: 0.1,
            misalign1: misalignment,
            misalign2: 0.0,
            noise_range0: 0.0,
            noise_range1: 0.0,
            noise_range2: NOISE_RANGE_2_CALIBRATED,
            gen_azimuth: 0.0,
            gen_polar_offset: GEN_OFFSET_FRACTION * misalignment,
            eff_h: EFF_H_CALIBRATED,
            eff_v: EFF_V_CALIBRATED,
            dark_h: DARK_H_DEFAULT,
            dark_v: DARK_V_DEFAULT,
            epsilon: 1e-10,
            n_total: 10_000_000_000,
            n_test_per_state: 90_000,
            sys_freq_hz: 1e7,
            n_rounds: 10_000_000,
            master_seed: 20260823,
            conservative_eta: false,
            prefactor_variant: PrefactorVariant::Supplementary,
            per_round_noise_sampling: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.source_model().validate()?;
        self.detector_model().validate()?;
        self.budget()?;
        if self.n_rounds == 0 {
            return Err(Error::Config("n_rounds must be >= 1".into()));
        }
        Ok(())
    }

    /// Replace the master seed from QRNG_SEED when the variable is set.
    pub fn apply_env_seed(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(QRNG_SEED_ENV) {
            self.master_seed = v
                .trim()
                .parse::<u64>()
                .map_err(|e| Error::Config(format!("{QRNG_SEED_ENV}={v}: {e}")))?;
        }
        Ok(())
    }

    pub fn source_model(&self) -> SourceModel {
        SourceModel {
            mu: self.mu,
            p_gen: self.p_gen,
            p_test: self.p_test,
            misalign1: self.misalign1,
            misalign2: self.misalign2,
            noise_range0: self.noise_range0,
            noise_range1: self.noise_range1,
            noise_range2: self.noise_range2,
            gen_azimuth: self.gen_azimuth,
            gen_polar_offset: self.gen_polar_offset,
        }
    }

    pub fn detector_model(&self) -> DetectorModel {
        DetectorModel {
            eff_h: self.eff_h,
            eff_v: self.eff_v,
            dark_h: self.dark_h,
            dark_v: self.dark_v,
        }
    }

    pub fn budget(&self) -> Result<SecurityBudget> {
        let n_gen = self
            .n_total
            .checked_sub(3 * self.n_test_per_state)
            .ok_or_else(|| Error::Config("test budget exceeds n_total".into()))?;
        SecurityBudget::new(
            self.epsilon,
            self.n_total,
            n_gen,
            self.n_test_per_state,
            self.mu,
            self.sys_freq_hz,
        )
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            per_round_noise: self.per_round_noise_sampling,
        }
    }

    /// Stable hash of the full configuration, echoed into output artifacts.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
