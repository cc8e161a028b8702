//! Band-limited Gaussian noise synthesis and spectrum estimation.
//!
//! Noise is synthesized in the frequency domain: every positive-frequency
//! bin up to the bandwidth receives an independent complex Gaussian
//! coefficient, everything above it is zero, and an inverse FFT produces a
//! circular, exactly band-limited record. The record is therefore periodic in
//! its own length, which the estimators downstream rely on.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a band-limited white noise record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    psd_level: f64,
    bandwidth: f64,
    sample_rate: f64,
    n_samples: usize,
}

impl NoiseSpec {
    /// `psd_level` is the one-sided density in V²/Hz (or A²/Hz).
    pub fn new(psd_level: f64, bandwidth: f64, sample_rate: f64, n_samples: usize) -> Result<Self> {
        if !psd_level.is_finite() || psd_level < 0.0 {
            return Err(Error::param("psd_level", format!("must be finite and >= 0, got {psd_level}")));
        }
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(Error::param("bandwidth", format!("must be finite and > 0, got {bandwidth}")));
        }
        if !sample_rate.is_finite() {
            return Err(Error::param("sample_rate", "must be finite"));
        }
        if sample_rate < 2.0 * bandwidth {
            return Err(Error::param(
                "sample_rate",
                format!("{sample_rate} Hz aliases a {bandwidth} Hz band (needs >= {})", 2.0 * bandwidth),
            ));
        }
        if n_samples < 2 {
            return Err(Error::param("n_samples", format!("must be >= 2, got {n_samples}")));
        }
        Ok(Self {
            psd_level,
            bandwidth,
            sample_rate,
            n_samples,
        })
    }

    pub fn psd_level(&self) -> f64 {
        self.psd_level
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Same record geometry with a different density level.
    pub fn with_psd(&self, psd_level: f64) -> Result<Self> {
        Self::new(psd_level, self.bandwidth, self.sample_rate, self.n_samples)
    }

    /// Theoretical mean-square value `psd_level * bandwidth`.
    pub fn mean_square(&self) -> f64 {
        self.psd_level * self.bandwidth
    }
}

/// A sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("waveform has no samples"));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::param("sample_rate", format!("must be finite and > 0, got {sample_rate}")));
        }
        if let Some(pos) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::param("samples", format!("non-finite value at index {pos}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    // Callers guarantee the invariants.
    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: f64) -> Self {
        debug_assert!(!samples.is_empty());
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    /// Pointwise map into a new waveform at the same rate.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Waveform {
        Waveform::from_parts(self.samples.iter().map(|&x| f(x)).collect(), self.sample_rate)
    }
}

/// Reusable frequency-domain synthesizer for one record geometry.
///
/// Holds the FFT plan so that per-period synthesis does not re-plan.
#[derive(Clone)]
pub struct BandLimitedSynth {
    n_samples: usize,
    sample_rate: f64,
    /// Highest populated bin index.
    top_bin: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for BandLimitedSynth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BandLimitedSynth")
            .field("n_samples", &self.n_samples)
            .field("sample_rate", &self.sample_rate)
            .field("top_bin", &self.top_bin)
            .finish()
    }
}

impl BandLimitedSynth {
    /// Geometry is taken from `spec`; the density level is supplied per call.
    pub fn new(spec: &NoiseSpec) -> Self {
        let n = spec.n_samples;
        let df = spec.sample_rate / n as f64;
        // Bin k covers [k - 1/2, k + 1/2] * df; include it when its centre is in band.
        let top_bin = ((spec.bandwidth / df) * (1.0 + 1e-12)).floor() as usize;
        let top_bin = top_bin.min(n / 2);
        let fft = FftPlanner::new().plan_fft_inverse(n);
        Self {
            n_samples: n,
            sample_rate: spec.sample_rate,
            top_bin,
            fft,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Bandwidth actually realized on the bin grid.
    pub fn realized_bandwidth(&self) -> f64 {
        let df = self.sample_rate / self.n_samples as f64;
        if 2 * self.top_bin == self.n_samples {
            (self.top_bin as f64 - 0.5) * df
        } else {
            self.top_bin as f64 * df
        }
    }

    /// Amplitude scale of bin `k` for a one-sided density `psd`.
    ///
    /// Regular bins carry `psd * df` of power split over two real Gaussians;
    /// the Nyquist bin is real and only half as wide.
    fn bin_scale(&self, k: usize, psd: f64) -> f64 {
        let n = self.n_samples as f64;
        let df = self.sample_rate / n;
        if 2 * k == self.n_samples {
            n * (psd * df / 2.0).sqrt()
        } else {
            n * (psd * df / 4.0).sqrt()
        }
    }

    fn inverse(&self, spectrum: &mut [Complex64]) {
        self.fft.process(spectrum);
    }

    /// One record with one-sided density `psd`.
    pub fn generate<R: Rng + ?Sized>(&self, psd: f64, rng: &mut R) -> Waveform {
        let n = self.n_samples;
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        if psd > 0.0 {
            for k in 1..=self.top_bin {
                let s = self.bin_scale(k, psd);
                if 2 * k == n {
                    let g: f64 = rng.sample(StandardNormal);
                    z[k] = Complex64::new(s * g, 0.0);
                } else {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    z[k] = Complex64::new(s * re, s * im);
                    z[n - k] = z[k].conj();
                }
            }
            self.inverse(&mut z);
        }
        let inv_n = 1.0 / n as f64;
        Waveform::from_parts(z.iter().map(|c| c.re * inv_n).collect(), self.sample_rate)
    }

    /// Two independent records from a single complex inverse FFT.
    ///
    /// The real part carries the first Hermitian spectrum and the imaginary
    /// part the second.
    pub fn generate_pair<R: Rng + ?Sized>(&self, psd_a: f64, psd_b: f64, rng: &mut R) -> (Waveform, Waveform) {
        let n = self.n_samples;
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let i = Complex64::new(0.0, 1.0);
        for k in 1..=self.top_bin {
            let sa = self.bin_scale(k, psd_a);
            let sb = self.bin_scale(k, psd_b);
            if 2 * k == n {
                let ga: f64 = rng.sample(StandardNormal);
                let gb: f64 = rng.sample(StandardNormal);
                z[k] = Complex64::new(sa * ga, sb * gb);
            } else {
                let a = Complex64::new(sa * rng.sample::<f64, _>(StandardNormal), sa * rng.sample::<f64, _>(StandardNormal));
                let b = Complex64::new(sb * rng.sample::<f64, _>(StandardNormal), sb * rng.sample::<f64, _>(StandardNormal));
                z[k] = a + i * b;
                z[n - k] = a.conj() + i * b.conj();
            }
        }
        self.inverse(&mut z);
        let inv_n = 1.0 / n as f64;
        let a = z.iter().map(|c| c.re * inv_n).collect();
        let b = z.iter().map(|c| c.im * inv_n).collect();
        (
            Waveform::from_parts(a, self.sample_rate),
            Waveform::from_parts(b, self.sample_rate),
        )
    }
}

/// Synthesize one band-limited white Gaussian record.
///
/// The result is a deterministic function of `spec` and the state of `rng`.
pub fn synth_band_limited<R: Rng + ?Sized>(spec: &NoiseSpec, rng: &mut R) -> Waveform {
    BandLimitedSynth::new(spec).generate(spec.psd_level, rng)
}

/// One-sided power spectral density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub density: Vec<f64>,
    /// Bin spacing in Hz.
    pub resolution: f64,
    /// Number of averaged segments.
    pub segments: usize,
}

impl Spectrum {
    /// Integral of the density over frequency.
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.resolution
    }

    /// Power in bins whose centre frequency satisfies `pred`.
    pub fn power_where(&self, pred: impl Fn(f64) -> bool) -> f64 {
        self.frequencies
            .iter()
            .zip(&self.density)
            .filter(|(f, _)| pred(**f))
            .map(|(_, p)| p * self.resolution)
            .sum()
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }
}

/// Averaged periodogram (Bartlett's method) with `n_bins` one-sided bins,
/// DC and Nyquist included.
///
/// Segments are `2 * (n_bins - 1)` samples long with a rectangular window and
/// no overlap; trailing samples that do not fill a segment are dropped. The
/// density integrates to the mean square of the analysed samples.
pub fn periodogram(w: &Waveform, n_bins: usize) -> Result<Spectrum> {
    if w.is_empty() {
        return Err(Error::EmptyInput("periodogram of an empty waveform"));
    }
    if n_bins < 2 {
        return Err(Error::param("n_bins", format!("must be >= 2, got {n_bins}")));
    }
    if w.len() < 2 * n_bins {
        return Err(Error::param(
            "n_bins",
            format!("waveform of {} samples is shorter than 2 * n_bins = {}", w.len(), 2 * n_bins),
        ));
    }
    let seg = 2 * (n_bins - 1);
    let segments = w.len() / seg;
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; n_bins];
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    for chunk in w.samples().chunks_exact(seg) {
        for (b, &x) in buf.iter_mut().zip(chunk) {
            *b = Complex64::new(x, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
    }
    let fs = w.sample_rate();
    let resolution = fs / seg as f64;
    let norm = 1.0 / (segments as f64 * fs * seg as f64);
    let density = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || k == n_bins - 1 { 1.0 } else { 2.0 };
            a * norm * one_sided
        })
        .collect();
    let frequencies = (0..n_bins).map(|k| k as f64 * resolution).collect();
    Ok(Spectrum {
        frequencies,
        density,
        resolution,
        segments,
    })
}
