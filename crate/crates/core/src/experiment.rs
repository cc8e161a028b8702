//! Batch experiments behind the `levels`, `sweep`, `session` and `spectra`
//! subcommands. Each returns a plain data structure with CSV / JSON / table
//! renderers so the binary stays thin.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic::{epsilon_combined, epsilon_current_00, epsilon_current_11, epsilon_voltage};
use crate::circuit::{channel_waveforms, printed_current_11_level, BitState};
use crate::config::{Derived, Mode, SystemConfig, Units};
use crate::decision::{CombinedOutcome, Interpretation};
use crate::error::{Error, Result};
use crate::estimator::{finite_mean_square, squared_noise_psd_theory};
use crate::noise::{periodogram, BandLimitedSynth, NoiseSpec, Waveform};
use crate::protocol::{bits_to_hex, extract_key, PeriodRecord, PeriodSimulator, SessionReport};
use crate::stats::{wilson_interval, Z95};

// Streams reserved for long calibration runs; period streams count up from 0.
const LEVELS_STREAM_BASE: u64 = u64::MAX - 16;
const SPECTRA_STREAM: u64 = u64::MAX - 1;

fn long_run_channel(config: &SystemConfig, state: BitState, n_samples: usize, stream: u64) -> Result<(Waveform, Waveform)> {
    let consts = config.constants()?;
    let resistors = config.resistors()?;
    let (a, b) = state.representative();
    let lp = resistors.loop_state(a, b);
    let spec = NoiseSpec::new(1.0, config.b_kljn, config.sample_rate(), n_samples)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
    rng.set_stream(stream);
    let (ua, ub) = BandLimitedSynth::new(&spec).generate_pair(
        consts.four_kt() * lp.r_alice,
        consts.four_kt() * lp.r_bob,
        &mut rng,
    );
    channel_waveforms(&ua, &ub, &lp)
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub state: BitState,
    pub voltage_theory: f64,
    pub voltage_empirical: f64,
    pub voltage_rel_err: f64,
    pub current_theory: f64,
    pub current_empirical: f64,
    pub current_rel_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub config_hash: String,
    pub units: Units,
    pub boltzmann: f64,
    pub four_kt: f64,
    pub calibration_samples: usize,
    pub rows: Vec<LevelRow>,
    /// The 11 current level written with a `(1 + alpha) R` loop, for comparison.
    pub printed_current_11: f64,
}

/// Exact levels for all three states next to long-run empirical values.
pub fn cmd_levels(config: &SystemConfig) -> Result<LevelReport> {
    config.validate()?;
    let levels = config.levels()?;
    let consts = config.constants()?;
    let mut rows = Vec::new();
    for state in BitState::ALL {
        let (u_c, i_c) = long_run_channel(config, state, config.calibration_samples, LEVELS_STREAM_BASE + state.index() as u64)?;
        let (vt, it) = (levels.voltage(state), levels.current(state));
        let (ve, ie) = (finite_mean_square(&u_c)?, finite_mean_square(&i_c)?);
        rows.push(LevelRow {
            state,
            voltage_theory: vt,
            voltage_empirical: ve,
            voltage_rel_err: (ve - vt) / vt,
            current_theory: it,
            current_empirical: ie,
            current_rel_err: (ie - it) / it,
        });
    }
    Ok(LevelReport {
        config_hash: config.hash(),
        units: config.units,
        boltzmann: consts.k,
        four_kt: consts.four_kt(),
        calibration_samples: config.calibration_samples,
        rows,
        printed_current_11: printed_current_11_level(&config.resistors()?, &consts, config.b_kljn),
    })
}

impl LevelReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "state,voltage_theory,voltage_empirical,voltage_rel_err,current_theory,current_empirical,current_rel_err,config_hash\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.state.label(),
                r.voltage_theory,
                r.voltage_empirical,
                r.voltage_rel_err,
                r.current_theory,
                r.current_empirical,
                r.current_rel_err,
                self.config_hash
            ));
        }
        s
    }
}

impl fmt::Display for LevelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "config {}  units {:?}  k = {:e} J/K  4kT_eff = {:e}", self.config_hash, self.units, self.boltzmann, self.four_kt)?;
        writeln!(f, "calibration run: {} samples per state", self.calibration_samples)?;
        writeln!(
            f,
            "{:>6} {:>13} {:>13} {:>9} {:>13} {:>13} {:>9}",
            "state", "<u²> theory", "<u²> meas", "rel err", "<i²> theory", "<i²> meas", "rel err"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>6} {:>13.6e} {:>13.6e} {:>+9.2e} {:>13.6e} {:>13.6e} {:>+9.2e}",
                r.state.label(),
                r.voltage_theory,
                r.voltage_empirical,
                r.voltage_rel_err,
                r.current_theory,
                r.current_empirical,
                r.current_rel_err
            )?;
        }
        write!(
            f,
            "note: 11 current level with a (1+alpha)R loop would be {:.6e}; the loop law uses R_A + R_B",
            self.printed_current_11
        )
    }
}

/// A dangerous-error type: an insecure actual state read as 01/10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorType {
    #[serde(rename = "voltage_00")]
    Voltage00,
    #[serde(rename = "voltage_11")]
    Voltage11,
    #[serde(rename = "current_00")]
    Current00,
    #[serde(rename = "current_11")]
    Current11,
    #[serde(rename = "combined_00")]
    Combined00,
    #[serde(rename = "combined_11")]
    Combined11,
}

impl ErrorType {
    pub fn for_mode(mode: Mode) -> [ErrorType; 2] {
        match mode {
            Mode::Voltage => [ErrorType::Voltage11, ErrorType::Voltage00],
            Mode::Current => [ErrorType::Current11, ErrorType::Current00],
            Mode::Combined => [ErrorType::Combined11, ErrorType::Combined00],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ErrorType::Voltage00 => "voltage_00",
            ErrorType::Voltage11 => "voltage_11",
            ErrorType::Current00 => "current_00",
            ErrorType::Current11 => "current_11",
            ErrorType::Combined00 => "combined_00",
            ErrorType::Combined11 => "combined_11",
        }
    }

    /// The actual state this error starts from.
    pub fn state(self) -> BitState {
        match self {
            ErrorType::Voltage00 | ErrorType::Current00 | ErrorType::Combined00 => BitState::Both0,
            _ => BitState::Both1,
        }
    }

    pub fn analytic(self, config: &SystemConfig, gamma: f64) -> Result<f64> {
        let c = config;
        Ok(match self {
            ErrorType::Voltage00 => epsilon_voltage(c.beta, gamma)?,
            ErrorType::Voltage11 => epsilon_voltage(c.delta, gamma)?,
            ErrorType::Current00 => epsilon_current_00(c.rho, gamma)?,
            ErrorType::Current11 => epsilon_current_11(c.lambda, gamma)?,
            ErrorType::Combined00 => epsilon_combined(c.beta, c.rho, gamma)?,
            ErrorType::Combined11 => epsilon_combined(c.delta, c.lambda, gamma)?,
        }
        .value)
    }

    pub fn is_error(self, r: &PeriodRecord) -> bool {
        let secure = Interpretation::Secure0110;
        match self {
            ErrorType::Voltage00 | ErrorType::Voltage11 => r.v_interp == secure,
            ErrorType::Current00 | ErrorType::Current11 => r.i_interp == secure,
            ErrorType::Combined00 | ErrorType::Combined11 => r.outcome == CombinedOutcome::KeepSecure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub eps_analytic: f64,
    pub eps_mc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_errors: u64,
    pub n_trials: u64,
    pub error_type: &'static str,
    pub config_hash: String,
}

pub const SWEEP_HEADER: &str = "gamma,eps_analytic,eps_mc,ci_low,ci_high,n_errors,n_trials,error_type,config_hash";

/// Count dangerous errors per γ with the actual state forced, `n_periods`
/// trials per point. `force` narrows the sweep to the error types of one
/// insecure state.
pub fn cmd_sweep(config: &SystemConfig, gammas: &[f64], mode: Mode, force: Option<BitState>) -> Result<Vec<SweepRow>> {
    if gammas.is_empty() {
        return Err(Error::Usage("--gammas needs at least one value".into()));
    }
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Usage("--gammas must be strictly ascending".into()));
    }
    if config.n_periods == 0 {
        return Err(Error::Usage("n_periods must be >= 1".into()));
    }
    if force == Some(BitState::Mixed) {
        return Err(Error::Usage("sweep measures dangerous errors; --force-state must be 00 or 11".into()));
    }
    let types: Vec<ErrorType> = ErrorType::for_mode(mode)
        .into_iter()
        .filter(|t| force.is_none_or(|s| t.state() == s))
        .collect();
    let mut rows = Vec::new();
    for &gamma in gammas {
        let base = config.with_gamma(gamma)?;
        for t in &types {
            let point = SystemConfig {
                force_state: Some(t.state()),
                mode,
                ..base.clone()
            };
            let sim = PeriodSimulator::new(&point)?;
            let records = sim.simulate_many(point.n_periods, point.master_seed);
            let n_errors = records.iter().filter(|r| t.is_error(r)).count() as u64;
            let n = point.n_periods;
            let (lo, hi) = wilson_interval(n_errors, n, Z95);
            rows.push(SweepRow {
                gamma,
                eps_analytic: t.analytic(&point, gamma)?,
                eps_mc: n_errors as f64 / n as f64,
                ci_low: lo,
                ci_high: hi,
                n_errors,
                n_trials: n,
                error_type: t.label(),
                config_hash: point.hash(),
            });
        }
    }
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        s.push_str(&format!(
            "{},{:e},{:e},{:e},{:e},{},{},{},{}\n",
            r.gamma, r.eps_analytic, r.eps_mc, r.ci_low, r.ci_high, r.n_errors, r.n_trials, r.error_type, r.config_hash
        ));
    }
    s
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = format!(
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>9} {:>9}  {}\n",
        "gamma", "analytic", "monte carlo", "ci low", "ci high", "errors", "trials", "type"
    );
    for r in rows {
        s.push_str(&format!(
            "{:>8} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>9} {:>9}  {}\n",
            r.gamma, r.eps_analytic, r.eps_mc, r.ci_low, r.ci_high, r.n_errors, r.n_trials, r.error_type
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionOutput {
    pub config_hash: String,
    pub config: SystemConfig,
    pub derived: Derived,
    pub report: SessionReport,
    pub key_bits: usize,
    pub alice_key_hex: String,
    pub bob_key_hex: String,
    pub key_mismatches: usize,
}

impl SessionOutput {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("session output serializes") + "\n"
    }
}

/// Full session with key extraction.
pub fn cmd_session(config: &SystemConfig) -> Result<SessionOutput> {
    if config.n_periods == 0 {
        return Err(Error::Usage("n_periods must be >= 1".into()));
    }
    config.validate()?;
    let sim = PeriodSimulator::new(config)?;
    let records = sim.simulate_many(config.n_periods, config.master_seed);
    let report = SessionReport::from_records(&records, config.mode);
    let keys = extract_key(&records, config.mode);
    Ok(SessionOutput {
        config_hash: config.hash(),
        config: config.clone(),
        derived: config.derived()?,
        report,
        key_bits: keys.len(),
        alice_key_hex: bits_to_hex(&keys.alice),
        bob_key_hex: bits_to_hex(&keys.bob),
        key_mismatches: keys.mismatches().len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectraOutput {
    pub config_hash: String,
    pub state: BitState,
    pub current_psd: f64,
    pub frequencies: Vec<f64>,
    pub empirical: Vec<f64>,
    pub theory: Vec<f64>,
    /// Share of the AC power in bins above `2 B`.
    pub out_of_support_fraction: f64,
}

/// Periodogram of the AC part of `i_c²` against the triangular prediction.
pub fn cmd_spectra(config: &SystemConfig) -> Result<SpectraOutput> {
    config.validate()?;
    let state = config.force_state.unwrap_or(BitState::Both1);
    let (_, i_c) = long_run_channel(config, state, config.spectrum_samples, SPECTRA_STREAM)?;
    let sq = i_c.map(|x| x * x);
    let mean = finite_mean_square(&i_c)?;
    let ac = sq.map(|x| x - mean);
    let spec = periodogram(&ac, config.spectrum_bins)?;
    let s_level = config.levels()?.current_psd(state);
    let b = config.b_kljn;
    let theory: Vec<f64> = spec
        .frequencies
        .iter()
        .map(|&f| squared_noise_psd_theory(f, s_level, b, 1.0))
        .collect();
    let total = spec.total_power();
    let outside = spec.power_where(|f| f > 2.0 * b);
    Ok(SpectraOutput {
        config_hash: config.hash(),
        state,
        current_psd: s_level,
        frequencies: spec.frequencies,
        empirical: spec.density,
        theory,
        out_of_support_fraction: if total > 0.0 { outside / total } else { 0.0 },
    })
}

impl SpectraOutput {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("f,empirical_psd,theory_psd,config_hash\n");
        for ((f, e), t) in self.frequencies.iter().zip(&self.empirical).zip(&self.theory) {
            s.push_str(&format!("{f},{e:e},{t:e},{}\n", self.config_hash));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SystemConfig {
        SystemConfig {
            alpha: 10.0,
            gamma: 20.0,
            n_periods: 200,
            calibration_samples: 1 << 14,
            spectrum_samples: 1 << 14,
            spectrum_bins: 65,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn levels_table_has_expected_theory() {
        let r = cmd_levels(&small()).unwrap();
        let cur: Vec<f64> = r.rows.iter().map(|r| r.current_theory).collect();
        // Order 00, 11, 01/10.
        assert!((cur[0] - 0.5).abs() < 1e-15);
        assert!((cur[1] - 0.05).abs() < 1e-15);
        assert!((cur[2] - 1.0 / 11.0).abs() < 1e-15);
        let text = r.to_string();
        assert!(text.contains("5.000000e-2") && text.contains("9.090909e-2") && text.contains("5.000000e-1"), "{text}");
    }

    #[test]
    fn si_levels_echo_boltzmann() {
        let c = SystemConfig {
            units: Units::Si,
            r: 1e4,
            ..small()
        };
        let r = cmd_levels(&c).unwrap();
        assert_eq!(r.boltzmann, 1.380649e-23);
        assert!(r.to_string().contains("1.380649e-23"));
    }

    #[test]
    fn sweep_usage_errors() {
        let c = small();
        assert_eq!(cmd_sweep(&c, &[], Mode::Current, None).unwrap_err().exit_code(), 2);
        assert!(cmd_sweep(&c, &[30.0, 20.0], Mode::Current, None).is_err());
        assert!(cmd_sweep(&c, &[20.0], Mode::Current, Some(BitState::Mixed)).is_err());
    }

    #[test]
    fn sweep_analytic_columns() {
        let c = SystemConfig { n_periods: 10, ..small() };
        let rows = cmd_sweep(&c, &[100.0], Mode::Current, Some(BitState::Both1)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].error_type, "current_11");
        assert!(((rows[0].eps_analytic - 1.114e-3) / 1.114e-3).abs() < 1e-3);

        let rows = cmd_sweep(&c, &[100.0, 200.0], Mode::Combined, Some(BitState::Both0)).unwrap();
        assert!(((rows[0].eps_analytic - 1.24e-6) / 1.24e-6).abs() < 5e-3);
        assert!(((rows[1].eps_analytic - 4.6e-12) / 4.6e-12).abs() < 2e-2);
        let csv = sweep_to_csv(&rows);
        assert!(csv.starts_with(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn session_accounting_closes() {
        let out = cmd_session(&small()).unwrap();
        assert_eq!(out.report.total_combined(), 200);
        assert!(cmd_session(&SystemConfig { n_periods: 0, ..small() }).unwrap_err().exit_code() == 2);
    }

    #[test]
    fn spectra_theory_column_shape() {
        let out = cmd_spectra(&SystemConfig { oversample: 8, ..small() }).unwrap();
        let s = out.current_psd;
        assert_eq!(out.state, BitState::Both1);
        assert!((out.theory[0] - 2.0 * s * s).abs() < 1e-15);
        for (f, t) in out.frequencies.iter().zip(&out.theory) {
            if *f >= 2.0 {
                assert_eq!(*t, 0.0);
            }
        }
    }
}
