//! Finite-time mean-square measurement and the spectral theory of the squared
//! channel signal.
//!
//! A measurement squares the channel signal and averages it. Two averagers
//! are provided. [`Averaging::Block`] is the plain arithmetic mean over one
//! bit period. [`Averaging::LowPass`] is an ideal low-pass filter with cut-off
//! `f_B = 1/tau`, realized on a circular record spanning several periods and
//! read out at one instant. Only the low-pass averager has the noise bandwidth
//! `f_B` that the closed-form fluctuation and crossing-rate results assume; a
//! block mean over `tau` has half of it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::Waveform;

/// Below this γ the flat-spectrum and Gaussian approximations are poor.
pub const GAMMA_WARN_BELOW: f64 = 10.0;

/// Averaging time expressed through `gamma = B_KLJN / f_B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingWindow {
    pub gamma: f64,
    pub tau: f64,
    pub f_b: f64,
}

impl AveragingWindow {
    pub fn new(gamma: f64, bandwidth: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be finite and > 0, got {gamma}")));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::param("b_kljn", format!("must be finite and > 0, got {bandwidth}")));
        }
        if gamma < GAMMA_WARN_BELOW {
            log::warn!("gamma = {gamma} < {GAMMA_WARN_BELOW}: closed-form error model is unreliable");
        }
        let tau = gamma / bandwidth;
        Ok(Self {
            gamma,
            tau,
            f_b: 1.0 / tau,
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.gamma * self.f_b
    }
}

/// Mean-square wire voltage and current for one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub msv: f64,
    pub msi: f64,
}

/// Arithmetic mean of the squared samples.
pub fn finite_mean_square(w: &Waveform) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptyInput("mean square of an empty waveform"));
    }
    Ok(w.samples().iter().map(|x| x * x).sum::<f64>() / w.len() as f64)
}

/// Which averaging unit follows the squarer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    /// Mean over exactly one period.
    Block,
    /// Ideal low-pass at `f_B` on a circular record of `span` periods.
    #[serde(rename = "lowpass")]
    LowPass { span: usize },
}

impl Averaging {
    /// Number of bit periods of noise one measurement consumes.
    pub fn record_periods(&self) -> usize {
        match self {
            Averaging::Block => 1,
            Averaging::LowPass { span } => *span,
        }
    }
}

/// Ideal low-pass mean square of a circular record, read at sample 0.
///
/// DFT bins of the squared record below `cutoff` pass with unit gain, a bin
/// exactly at `cutoff` passes at half power, and everything above is removed.
pub fn lowpass_mean_square(w: &Waveform, cutoff: f64) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::EmptyInput("mean square of an empty waveform"));
    }
    if !(cutoff.is_finite() && cutoff > 0.0) {
        return Err(Error::param("cutoff", format!("must be finite and > 0, got {cutoff}")));
    }
    let kernel = lowpass_kernel(w.len(), w.sample_rate(), cutoff);
    Ok(apply_kernel(&kernel, w.samples()))
}

fn lowpass_kernel(n: usize, sample_rate: f64, cutoff: f64) -> Vec<f64> {
    let edge = cutoff * n as f64 / sample_rate;
    let mut weights = Vec::new();
    let mut k = 1usize;
    while (k as f64) <= edge + 1e-9 && 2 * k < n {
        let w = if (k as f64 - edge).abs() <= 1e-9 {
            std::f64::consts::FRAC_1_SQRT_2
        } else {
            1.0
        };
        weights.push((k, w));
        k += 1;
    }
    let inv_n = 1.0 / n as f64;
    (0..n)
        .map(|i| {
            let mut h = 1.0;
            for &(k, w) in &weights {
                h += 2.0 * w * (2.0 * PI * (k * i % n) as f64 * inv_n).cos();
            }
            h * inv_n
        })
        .collect()
}

fn apply_kernel(kernel: &[f64], x: &[f64]) -> f64 {
    // A squaring-and-averaging unit never reports negative power.
    kernel.iter().zip(x).map(|(h, v)| h * v * v).sum::<f64>().max(0.0)
}

/// Precomputed averaging unit for a fixed record geometry.
#[derive(Debug, Clone)]
pub struct Averager {
    kernel: Vec<f64>,
}

impl Averager {
    /// `n_samples` must be the record length the averager will see.
    pub fn new(averaging: Averaging, n_samples: usize, sample_rate: f64, window: &AveragingWindow) -> Self {
        let kernel = match averaging {
            Averaging::Block => vec![1.0 / n_samples as f64; n_samples],
            Averaging::LowPass { .. } => lowpass_kernel(n_samples, sample_rate, window.f_b),
        };
        Self { kernel }
    }

    pub fn n_samples(&self) -> usize {
        self.kernel.len()
    }

    pub fn mean_square(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.kernel.len());
        apply_kernel(&self.kernel, x)
    }
}

/// One-sided PSD of the AC part of the squared signal for a flat input
/// spectrum `s_level` on `[0, bandwidth]`: a triangle from `2 q² B s²` at DC
/// down to zero at `2B`.
pub fn squared_noise_psd_theory(f: f64, s_level: f64, bandwidth: f64, q: f64) -> f64 {
    if !(0.0..=2.0 * bandwidth).contains(&f) {
        return 0.0;
    }
    2.0 * q * q * bandwidth * s_level * s_level * (1.0 - f / (2.0 * bandwidth))
}

/// RMS of the averaged fluctuation, `q s f_B sqrt(2 gamma)`.
pub fn averaged_fluctuation_rms(s_level: f64, window: &AveragingWindow, q: f64) -> f64 {
    q * s_level * window.f_b * (2.0 * window.gamma).sqrt()
}
