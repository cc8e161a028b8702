//! Closed-form error models.
//!
//! Every dangerous-error probability has the same shape,
//! `(1/sqrt 3) exp(-frac² gamma / 4)`: the expected number of upward
//! threshold crossings of the averaged fluctuation per bit period, obtained
//! from Rice's level-crossing formula with a flat fluctuation spectrum cut off
//! at `f_B`. The combined voltage-and-current method multiplies the two
//! single-mode probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{averaged_fluctuation_rms, squared_noise_psd_theory, AveragingWindow, GAMMA_WARN_BELOW};

const INV_SQRT_3: f64 = 0.577_350_269_189_625_8;

/// Threshold fractions. `beta` guards the voltage 00 level, `delta` the
/// voltage 11 level, `lambda` the current 11 level and `rho` the current 00
/// level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdFractions {
    pub beta: f64,
    pub delta: f64,
    pub lambda: f64,
    pub rho: f64,
}

impl ThresholdFractions {
    pub fn new(beta: f64, delta: f64, lambda: f64, rho: f64) -> Result<Self> {
        check_fraction("beta", beta)?;
        check_fraction("delta", delta)?;
        check_fraction("lambda", lambda)?;
        check_fraction("rho", rho)?;
        Ok(Self {
            beta,
            delta,
            lambda,
            rho,
        })
    }

    pub fn uniform(frac: f64) -> Result<Self> {
        Self::new(frac, frac, frac, frac)
    }
}

fn check_fraction(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must lie strictly inside (0, 1), got {v}")))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("gamma", format!("must be finite and >= 0, got {gamma}")))
    }
}

/// A formula value together with whether γ is in the range where the
/// rare-crossing approximation behind it holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorProbability {
    pub value: f64,
    pub reliable: bool,
}

impl ErrorProbability {
    fn at(value: f64, gamma: f64) -> Self {
        Self {
            value,
            reliable: gamma >= GAMMA_WARN_BELOW,
        }
    }
}

/// Mean rate at which a zero-mean Gaussian process with RMS `rms` crosses
/// `threshold` in either direction; `spectrum_moment` is `sqrt(∫ f² S(f) df)`.
pub fn rice_rate(threshold: f64, rms: f64, spectrum_moment: f64) -> Result<f64> {
    if !(rms.is_finite() && rms > 0.0) {
        return Err(Error::param("rms", format!("must be finite and > 0, got {rms}")));
    }
    if !(spectrum_moment.is_finite() && spectrum_moment >= 0.0) {
        return Err(Error::param("spectrum_moment", format!("must be finite and >= 0, got {spectrum_moment}")));
    }
    Ok(2.0 / rms * (-threshold * threshold / (2.0 * rms * rms)).exp() * spectrum_moment)
}

/// Upward crossing rate of `frac * <level>` for the flat fluctuation spectrum,
/// `(f_B / sqrt 3) exp(-frac² gamma / 4)`.
pub fn upcrossing_rate_flat(window: &AveragingWindow, frac: f64) -> f64 {
    window.f_b * INV_SQRT_3 * (-frac * frac * window.gamma / 4.0).exp()
}

/// The same rate assembled step by step: threshold as a fraction of the
/// level, fluctuation RMS from the averaged spectrum, flat-spectrum second
/// moment, then half of Rice's two-sided rate.
pub fn upcrossing_rate_via_rice(window: &AveragingWindow, frac: f64, s_level: f64) -> Result<f64> {
    let q = 1.0;
    let threshold = frac * q * s_level * window.bandwidth();
    let rms = averaged_fluctuation_rms(s_level, window, q);
    let s0 = squared_noise_psd_theory(0.0, s_level, window.bandwidth(), q);
    let moment = (s0 * window.f_b.powi(3) / 3.0).sqrt();
    Ok(rice_rate(threshold, rms, moment)? / 2.0)
}

fn single_mode(frac_name: &'static str, frac: f64, gamma: f64) -> Result<ErrorProbability> {
    check_fraction(frac_name, frac)?;
    check_gamma(gamma)?;
    Ok(ErrorProbability::at(INV_SQRT_3 * (-frac * frac * gamma / 4.0).exp(), gamma))
}

/// Current mode, actual 11 read as 01/10.
pub fn epsilon_current_11(lambda: f64, gamma: f64) -> Result<ErrorProbability> {
    single_mode("lambda", lambda, gamma)
}

/// Current mode, actual 00 read as 01/10.
pub fn epsilon_current_00(rho: f64, gamma: f64) -> Result<ErrorProbability> {
    single_mode("rho", rho, gamma)
}

/// Voltage mode with `beta` (00 errors) or `delta` (11 errors).
pub fn epsilon_voltage(frac: f64, gamma: f64) -> Result<ErrorProbability> {
    single_mode("frac_v", frac, gamma)
}

/// Combined method: a dangerous error needs both modes to read 01/10.
pub fn epsilon_combined(frac_v: f64, frac_i: f64, gamma: f64) -> Result<ErrorProbability> {
    let v = epsilon_voltage(frac_v, gamma)?;
    let i = single_mode("frac_i", frac_i, gamma)?;
    Ok(ErrorProbability::at(v.value * i.value, gamma))
}

/// The combined form written out, `(1/3) exp(-gamma (fv² + fi²) / 4)`.
pub fn epsilon_combined_closed_form(frac_v: f64, frac_i: f64, gamma: f64) -> f64 {
    (1.0 / 3.0) * (-gamma * (frac_v * frac_v + frac_i * frac_i) / 4.0).exp()
}
