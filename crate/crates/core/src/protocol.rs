//! Bit-exchange sessions: random resistor choices, physical simulation of
//! each period, threshold decisions, and error accounting.
//!
//! Every period draws from its own ChaCha stream (`master_seed`, stream =
//! period index), so records are a pure function of `(config, seed, index)`
//! and sessions can be simulated in parallel without changing any output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{channel_samples, Bit, BitState, LevelTable, LoopState, ResistorSet};
use crate::config::{Mode, SystemConfig};
use crate::decision::{combine, interpret_current, interpret_voltage, CombinedOutcome, DecisionBands, Interpretation};
use crate::error::{Error, Result};
use crate::estimator::{Averager, Measurement};
use crate::noise::{BandLimitedSynth, NoiseSpec};
use crate::stats::RateEstimate;

/// Everything that happened in one bit-exchange period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub index: u64,
    pub bit_alice: Bit,
    pub bit_bob: Bit,
    pub measurement: Measurement,
    pub v_interp: Interpretation,
    pub i_interp: Interpretation,
    /// Always `combine(v_interp, i_interp)`.
    pub outcome: CombinedOutcome,
}

impl PeriodRecord {
    pub fn from_measurement(index: u64, bit_alice: Bit, bit_bob: Bit, measurement: Measurement, bands: &DecisionBands) -> Self {
        let v_interp = interpret_voltage(measurement.msv, bands);
        let i_interp = interpret_current(measurement.msi, bands);
        Self {
            index,
            bit_alice,
            bit_bob,
            measurement,
            v_interp,
            i_interp,
            outcome: combine(v_interp, i_interp),
        }
    }

    pub fn actual(&self) -> BitState {
        BitState::of(self.bit_alice, self.bit_bob)
    }

    /// Verdict when only the reading(s) selected by `mode` are used.
    pub fn outcome_for(&self, mode: Mode) -> CombinedOutcome {
        match mode {
            Mode::Voltage => combine(self.v_interp, self.v_interp),
            Mode::Current => combine(self.i_interp, self.i_interp),
            Mode::Combined => self.outcome,
        }
    }

    pub fn kept(&self, mode: Mode) -> bool {
        self.outcome_for(mode) == CombinedOutcome::KeepSecure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NoiseSource {
    Synthesized,
    /// Measurements equal the exact levels; no noise is drawn.
    ExactLevels,
}

/// Per-session simulation state shared by all periods.
#[derive(Debug, Clone)]
pub struct PeriodSimulator {
    resistors: ResistorSet,
    levels: LevelTable,
    bands: DecisionBands,
    four_kt: f64,
    synth: BandLimitedSynth,
    averager: Averager,
    source: NoiseSource,
    force_state: Option<BitState>,
}

impl PeriodSimulator {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        let derived = config.derived()?;
        let window = config.window()?;
        let spec = NoiseSpec::new(1.0, config.b_kljn, derived.f_s, derived.record_samples)?;
        Ok(Self {
            resistors: config.resistors()?,
            levels: config.levels()?,
            bands: config.bands()?,
            four_kt: derived.four_kt,
            synth: BandLimitedSynth::new(&spec),
            averager: Averager::new(config.averaging(), derived.record_samples, derived.f_s, &window),
            source: NoiseSource::Synthesized,
            force_state: config.force_state,
        })
    }

    /// Replace noisy measurements by the exact mean-square levels.
    pub fn with_exact_levels(mut self) -> Self {
        self.source = NoiseSource::ExactLevels;
        self
    }

    pub fn with_forced_state(mut self, state: Option<BitState>) -> Self {
        self.force_state = state;
        self
    }

    pub fn bands(&self) -> &DecisionBands {
        &self.bands
    }

    pub fn levels(&self) -> &LevelTable {
        &self.levels
    }

    fn period_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        rng
    }

    fn draw_bits(&self, rng: &mut ChaCha8Rng) -> (Bit, Bit) {
        // Always consume both coins so forcing does not shift the noise draws.
        let alice = Bit::from_bool(rng.random());
        let bob = Bit::from_bool(rng.random());
        match self.force_state {
            None => (alice, bob),
            Some(BitState::Both0) => (Bit::Zero, Bit::Zero),
            Some(BitState::Both1) => (Bit::One, Bit::One),
            Some(BitState::Mixed) => (alice, alice.inverse()),
        }
    }

    /// Measure one period's wire noise for the given loop.
    pub fn measure<R: Rng + ?Sized>(&self, state: &LoopState, rng: &mut R) -> Measurement {
        match self.source {
            NoiseSource::ExactLevels => Measurement {
                msv: self.levels.voltage(state.state()),
                msi: self.levels.current(state.state()),
            },
            NoiseSource::Synthesized => {
                let psd_a = self.four_kt * state.r_alice;
                let psd_b = self.four_kt * state.r_bob;
                let (ua, ub) = self.synth.generate_pair(psd_a, psd_b, rng);
                let n = ua.len();
                let (mut u_c, mut i_c) = (Vec::with_capacity(n), Vec::with_capacity(n));
                channel_samples(ua.samples(), ub.samples(), state, &mut u_c, &mut i_c);
                Measurement {
                    msv: self.averager.mean_square(&u_c),
                    msi: self.averager.mean_square(&i_c),
                }
            }
        }
    }

    pub fn simulate(&self, index: u64, master_seed: u64) -> PeriodRecord {
        let mut rng = Self::period_rng(master_seed, index);
        let (alice, bob) = self.draw_bits(&mut rng);
        let state = self.resistors.loop_state(alice, bob);
        let m = self.measure(&state, &mut rng);
        PeriodRecord::from_measurement(index, alice, bob, m, &self.bands)
    }

    /// Periods `0..n_periods`, in index order, computed in parallel.
    pub fn simulate_many(&self, n_periods: u64, master_seed: u64) -> Vec<PeriodRecord> {
        (0..n_periods)
            .into_par_iter()
            .map(|i| self.simulate(i, master_seed))
            .collect()
    }
}

/// One period under `config`.
pub fn simulate_period(config: &SystemConfig, period_index: u64, master_seed: u64) -> Result<PeriodRecord> {
    Ok(PeriodSimulator::new(config)?.simulate(period_index, master_seed))
}

pub fn simulate_session(config: &SystemConfig, n_periods: u64, master_seed: u64) -> Result<Vec<PeriodRecord>> {
    if n_periods == 0 {
        return Err(Error::Usage("n_periods must be >= 1".into()));
    }
    Ok(PeriodSimulator::new(config)?.simulate_many(n_periods, master_seed))
}

/// Row/column order for every 3-way table: 00, 11, 01/10.
pub const STATE_LABELS: [&str; 3] = ["00", "11", "01/10"];

/// Aggregate statistics of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    pub n_periods: u64,
    pub mode: Mode,
    pub state_labels: [String; 3],
    /// `[actual][interpreted]` for the voltage reading.
    pub confusion_v: [[u64; 3]; 3],
    pub confusion_i: [[u64; 3]; 3],
    pub outcome_labels: [String; 5],
    /// `[actual][outcome]`.
    pub combined_counts: [[u64; 5]; 3],
    pub eps_hat_v_00: RateEstimate,
    pub eps_hat_v_11: RateEstimate,
    pub eps_hat_i_00: RateEstimate,
    pub eps_hat_i_11: RateEstimate,
    pub eps_hat_combined_00: RateEstimate,
    pub eps_hat_combined_11: RateEstimate,
    /// Actual 01/10 periods kept, over all actual 01/10 periods (mode-dependent).
    pub fidelity: RateEstimate,
    pub kept: u64,
    pub discard_rate: f64,
}

impl SessionReport {
    pub fn from_records(records: &[PeriodRecord], mode: Mode) -> Self {
        let mut confusion_v = [[0u64; 3]; 3];
        let mut confusion_i = [[0u64; 3]; 3];
        let mut combined_counts = [[0u64; 5]; 3];
        let mut kept_by_state = [0u64; 3];
        for r in records {
            let a = r.actual().index();
            confusion_v[a][r.v_interp.index()] += 1;
            confusion_i[a][r.i_interp.index()] += 1;
            combined_counts[a][r.outcome.index()] += 1;
            if r.kept(mode) {
                kept_by_state[a] += 1;
            }
        }
        let n = records.len() as u64;
        let row = |m: &[[u64; 3]; 3], s: BitState| m[s.index()].iter().sum::<u64>();
        let secure = Interpretation::Secure0110.index();
        let keep = CombinedOutcome::KeepSecure.index();
        let (s00, s11, smix) = (BitState::Both0, BitState::Both1, BitState::Mixed);
        let kept: u64 = kept_by_state.iter().sum();
        Self {
            n_periods: n,
            mode,
            state_labels: STATE_LABELS.map(String::from),
            eps_hat_v_00: RateEstimate::new(confusion_v[s00.index()][secure], row(&confusion_v, s00)),
            eps_hat_v_11: RateEstimate::new(confusion_v[s11.index()][secure], row(&confusion_v, s11)),
            eps_hat_i_00: RateEstimate::new(confusion_i[s00.index()][secure], row(&confusion_i, s00)),
            eps_hat_i_11: RateEstimate::new(confusion_i[s11.index()][secure], row(&confusion_i, s11)),
            eps_hat_combined_00: RateEstimate::new(combined_counts[s00.index()][keep], row(&confusion_v, s00)),
            eps_hat_combined_11: RateEstimate::new(combined_counts[s11.index()][keep], row(&confusion_v, s11)),
            fidelity: RateEstimate::new(kept_by_state[smix.index()], row(&confusion_v, smix)),
            kept,
            discard_rate: if n == 0 { 0.0 } else { (n - kept) as f64 / n as f64 },
            outcome_labels: CombinedOutcome::ALL.map(|o| o.name().to_string()),
            confusion_v,
            confusion_i,
            combined_counts,
        }
    }

    pub fn total_combined(&self) -> u64 {
        self.combined_counts.iter().flatten().sum()
    }
}

pub fn run_session(config: &SystemConfig, n_periods: u64, master_seed: u64) -> Result<SessionReport> {
    let records = simulate_session(config, n_periods, master_seed)?;
    Ok(SessionReport::from_records(&records, config.mode))
}

/// Key bits of both parties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedKeys {
    pub alice: Vec<u8>,
    pub bob: Vec<u8>,
    /// Period index each key bit came from.
    pub periods: Vec<u64>,
}

impl ExtractedKeys {
    pub fn len(&self) -> usize {
        self.alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alice.is_empty()
    }

    /// Positions where the two keys differ.
    pub fn mismatches(&self) -> Vec<usize> {
        self.alice
            .iter()
            .zip(&self.bob)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One key bit per kept period. The shared bit is Alice's bit: Alice keeps
/// her own bit and Bob keeps the inverse of his.
pub fn extract_key(records: &[PeriodRecord], mode: Mode) -> ExtractedKeys {
    let mut keys = ExtractedKeys {
        alice: Vec::new(),
        bob: Vec::new(),
        periods: Vec::new(),
    };
    for r in records.iter().filter(|r| r.kept(mode)) {
        keys.alice.push(r.bit_alice.as_u8());
        keys.bob.push(r.bit_bob.inverse().as_u8());
        keys.periods.push(r.index);
    }
    keys
}

/// Pack bits MSB-first into hex; the last byte is zero-padded.
pub fn bits_to_hex(bits: &[u8]) -> String {
    let bytes: Vec<u8> = bits
        .chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i))))
        .collect();
    hex::encode(bytes)
}
