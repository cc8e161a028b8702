//! System configuration: flat `key = value` text (TOML syntax), every key
//! optional, unknown keys rejected.
//!
//! | key | unit | default |
//! |-----|------|---------|
//! | `units` | `normalized` (4kT_eff = 1 V²/(Hz·Ω)) or `si` | `normalized` |
//! | `t_eff` | K, used in `si` units only | `1e18` |
//! | `r` | Ω, the low resistor R0 | `1.0` |
//! | `alpha` | dimensionless, R1 = alpha·R0, > 1 | `100` |
//! | `b_kljn` | Hz, noise bandwidth | `1.0` |
//! | `gamma` | dimensionless, B_KLJN·tau | `50` |
//! | `oversample` | integer, f_s = oversample·B_KLJN, >= 2 | `4` |
//! | `beta`, `delta`, `lambda`, `rho` | fractions in (0, 1) | `0.5` |
//! | `n_periods` | periods per session or sweep point | `10000` |
//! | `master_seed` | u64 | `1` |
//! | `mode` | `voltage`, `current` or `combined` | `combined` |
//! | `averaging` | `lowpass` or `block` | `lowpass` |
//! | `record_span` | periods per low-pass record, >= 1 | `4` |
//! | `force_state` | optional `00`, `11` or `0110` | unset |
//! | `calibration_samples` | samples per state for `levels` | `1048576` |
//! | `spectrum_samples` | samples for `spectra` | `4194304` |
//! | `spectrum_bins` | periodogram bins for `spectra` | `257` |

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::ThresholdFractions;
use crate::circuit::{theoretical_levels, BitState, LevelTable, PhysicsConstants, ResistorSet};
use crate::decision::{make_bands, DecisionBands};
use crate::error::{Error, Result};
use crate::estimator::{Averaging, AveragingWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Normalized,
    Si,
}

/// Which reading decides whether a period is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[serde(alias = "voltage_only")]
    Voltage,
    #[serde(alias = "current_only")]
    Current,
    Combined,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voltage" | "voltage_only" => Ok(Mode::Voltage),
            "current" | "current_only" => Ok(Mode::Current),
            "combined" => Ok(Mode::Combined),
            other => Err(Error::Usage(format!("unknown mode `{other}` (expected voltage, current or combined)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragingKind {
    Lowpass,
    Block,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub units: Units,
    pub t_eff: f64,
    pub r: f64,
    pub alpha: f64,
    pub b_kljn: f64,
    pub gamma: f64,
    pub oversample: u32,
    pub beta: f64,
    pub delta: f64,
    pub lambda: f64,
    pub rho: f64,
    pub n_periods: u64,
    pub master_seed: u64,
    pub mode: Mode,
    pub averaging: AveragingKind,
    pub record_span: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub force_state: Option<BitState>,
    pub calibration_samples: usize,
    pub spectrum_samples: usize,
    pub spectrum_bins: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            units: Units::Normalized,
            t_eff: 1e18,
            r: 1.0,
            alpha: 100.0,
            b_kljn: 1.0,
            gamma: 50.0,
            oversample: 4,
            beta: 0.5,
            delta: 0.5,
            lambda: 0.5,
            rho: 0.5,
            n_periods: 10_000,
            master_seed: 1,
            mode: Mode::Combined,
            averaging: AveragingKind::Lowpass,
            record_span: 4,
            force_state: None,
            calibration_samples: 1 << 20,
            spectrum_samples: 1 << 22,
            spectrum_bins: 257,
        }
    }
}

/// Quantities computed once from a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub tau: f64,
    pub f_b: f64,
    pub f_s: f64,
    pub samples_per_period: usize,
    pub record_samples: usize,
    pub four_kt: f64,
    pub boltzmann: f64,
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            Error::InvalidParameter { name, reason } => Error::Config(format!("{}: `{name}` {reason}", path.display())),
            other => other,
        })
    }

    /// Re-check every module-level invariant. Band overlap is not a config
    /// error; it surfaces when a run builds its decision bands.
    pub fn validate(&self) -> Result<()> {
        self.resistors()?;
        self.constants()?;
        self.fractions()?;
        if !(self.b_kljn.is_finite() && self.b_kljn > 0.0) {
            return Err(Error::param("b_kljn", format!("must be finite and > 0, got {}", self.b_kljn)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be finite and > 0, got {}", self.gamma)));
        }
        if self.oversample < 2 {
            return Err(Error::param("oversample", format!("must be >= 2, got {}", self.oversample)));
        }
        samples_per_period(self.gamma, self.oversample)?;
        if self.record_span == 0 {
            return Err(Error::param("record_span", "must be >= 1"));
        }
        if self.spectrum_bins < 2 {
            return Err(Error::param("spectrum_bins", "must be >= 2"));
        }
        if self.spectrum_samples < 2 * self.spectrum_bins {
            return Err(Error::param("spectrum_samples", "must be >= 2 * spectrum_bins"));
        }
        if self.calibration_samples < 2 {
            return Err(Error::param("calibration_samples", "must be >= 2"));
        }
        Ok(())
    }

    pub fn resistors(&self) -> Result<ResistorSet> {
        ResistorSet::new(self.r, self.alpha)
    }

    pub fn constants(&self) -> Result<PhysicsConstants> {
        match self.units {
            Units::Normalized => Ok(PhysicsConstants::normalized()),
            Units::Si => PhysicsConstants::si(self.t_eff),
        }
    }

    pub fn fractions(&self) -> Result<ThresholdFractions> {
        ThresholdFractions::new(self.beta, self.delta, self.lambda, self.rho)
    }

    pub fn window(&self) -> Result<AveragingWindow> {
        AveragingWindow::new(self.gamma, self.b_kljn)
    }

    pub fn averaging(&self) -> Averaging {
        match self.averaging {
            AveragingKind::Block => Averaging::Block,
            AveragingKind::Lowpass => Averaging::LowPass { span: self.record_span },
        }
    }

    pub fn levels(&self) -> Result<LevelTable> {
        theoretical_levels(&self.resistors()?, &self.constants()?, self.b_kljn)
    }

    pub fn bands(&self) -> Result<DecisionBands> {
        make_bands(&self.levels()?, &self.fractions()?)
    }

    pub fn sample_rate(&self) -> f64 {
        self.oversample as f64 * self.b_kljn
    }

    pub fn derived(&self) -> Result<Derived> {
        let window = self.window()?;
        let consts = self.constants()?;
        let spp = samples_per_period(self.gamma, self.oversample)?;
        Ok(Derived {
            tau: window.tau,
            f_b: window.f_b,
            f_s: self.sample_rate(),
            samples_per_period: spp,
            record_samples: spp * self.averaging().record_periods(),
            four_kt: consts.four_kt(),
            boltzmann: consts.k,
        })
    }

    /// Same configuration at a different γ.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let c = Self {
            gamma,
            ..self.clone()
        };
        c.validate()?;
        Ok(c)
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// `tau * f_s = gamma * oversample`, which must be a whole number of samples.
fn samples_per_period(gamma: f64, oversample: u32) -> Result<usize> {
    let n = gamma * oversample as f64;
    let rounded = n.round();
    if (n - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::param(
            "gamma",
            format!("gamma * oversample = {n} is not a whole number of samples per period"),
        ));
    }
    if rounded < 2.0 {
        return Err(Error::param("gamma", "a period must span at least 2 samples"));
    }
    Ok(rounded as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SystemConfig::default();
        c.validate().unwrap();
        let d = c.derived().unwrap();
        assert_eq!(d.samples_per_period, 200);
        assert_eq!(d.record_samples, 800);
        assert_eq!(d.f_s, 4.0);
        assert!((d.tau - 50.0).abs() < 1e-12);
    }

    #[test]
    fn parses_flat_keys() {
        let c = SystemConfig::from_toml_str(
            "# comment\nalpha = 10\ngamma = 100\nmode = \"current\"\nforce_state = \"11\"\nunits = \"si\"\nt_eff = 1e18\nr = 1e4\n",
        )
        .unwrap();
        assert_eq!(c.alpha, 10.0);
        assert_eq!(c.mode, Mode::Current);
        assert_eq!(c.force_state, Some(BitState::Both1));
        assert_eq!(c.derived().unwrap().boltzmann, 1.380649e-23);
    }

    #[test]
    fn unknown_key_is_an_error_with_location() {
        let e = SystemConfig::from_toml_str("alpha = 10\nalhpa = 3\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("alhpa"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn alpha_below_one_names_constraint() {
        let e = SystemConfig::from_toml_str("alpha = 0.5").unwrap_err();
        assert!(e.to_string().contains("alpha > 1"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn fractional_period_is_rejected() {
        assert!(SystemConfig::from_toml_str("gamma = 10.1").is_err());
        assert!(SystemConfig::from_toml_str("oversample = 1").is_err());
        assert!(SystemConfig::from_toml_str("lambda = 1.0").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = SystemConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.master_seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
