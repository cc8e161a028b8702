//! Small statistics helpers for Monte Carlo bookkeeping.

use serde::{Deserialize, Serialize};

/// z for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// A binomial rate with its 95% Wilson interval.
///
/// `rate` is `None` when the conditioning event never occurred.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub count: u64,
    pub trials: u64,
    pub rate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl RateEstimate {
    pub fn new(count: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self {
                count,
                trials,
                rate: None,
                ci_low: None,
                ci_high: None,
            };
        }
        let (lo, hi) = wilson_interval(count, trials, Z95);
        Self {
            count,
            trials,
            rate: Some(count as f64 / trials as f64),
            ci_low: Some(lo),
            ci_high: Some(hi),
        }
    }
}

/// Weighted least-squares line `y = a + b x`; returns `(a, b)`.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64)> {
    if x.len() != y.len() || x.len() != w.len() || x.len() < 2 {
        return None;
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Fit `ln(rate)` against `x` with inverse-variance binomial weights
/// `n p / (1 - p)`. Points with zero events are skipped. Returns the slope.
pub fn log_rate_slope(x: &[f64], counts: &[u64], trials: &[u64]) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for ((&x, &k), &n) in x.iter().zip(counts).zip(trials) {
        if k == 0 || n == 0 || k == n {
            continue;
        }
        let p = k as f64 / n as f64;
        xs.push(x);
        ys.push(p.ln());
        ws.push(n as f64 * p / (1.0 - p));
    }
    weighted_line_fit(&xs, &ys, &ws).map(|(_, b)| b)
}

/// Sample moments of a data set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn of(data: &[f64]) -> Self {
        let n = data.len();
        let nf = n as f64;
        let mean = data.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in data {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        m2 /= nf;
        m3 /= nf;
        m4 /= nf;
        Self {
            n,
            mean,
            variance: m2 * nf / (nf - 1.0),
            skewness: m3 / m2.powf(1.5),
            excess_kurtosis: m4 / (m2 * m2) - 3.0,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

/// Pearson correlation of paired samples.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    sxy / (sxx * syy).sqrt()
}
