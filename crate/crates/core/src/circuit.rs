//! The ideal single-loop KLJN circuit: resistor choice per bit, thermal noise
//! levels, and the Kirchhoff solution for the wire voltage and current.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::Waveform;

/// CODATA 2018 exact value, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// α below this is outside the regime the error model was built for.
pub const ALPHA_WARN_BELOW: f64 = 10.0;

/// A single party's bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bit {
    Zero,
    One,
}

impl Bit {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Bit::Zero => 0,
            Bit::One => 1,
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            Bit::Zero => Bit::One,
            Bit::One => Bit::Zero,
        }
    }
}

/// What the wire "sees": both low, both high, or the indistinguishable mixed pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BitState {
    #[serde(rename = "00")]
    Both0,
    #[serde(rename = "11")]
    Both1,
    #[serde(rename = "01/10")]
    Mixed,
}

impl BitState {
    pub const ALL: [BitState; 3] = [BitState::Both0, BitState::Both1, BitState::Mixed];

    pub fn of(alice: Bit, bob: Bit) -> Self {
        match (alice, bob) {
            (Bit::Zero, Bit::Zero) => BitState::Both0,
            (Bit::One, Bit::One) => BitState::Both1,
            _ => BitState::Mixed,
        }
    }

    pub fn index(self) -> usize {
        match self {
            BitState::Both0 => 0,
            BitState::Both1 => 1,
            BitState::Mixed => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BitState::Both0 => "00",
            BitState::Both1 => "11",
            BitState::Mixed => "01/10",
        }
    }

    /// A representative pair of bits producing this state (Alice 0 for the mixed case).
    pub fn representative(self) -> (Bit, Bit) {
        match self {
            BitState::Both0 => (Bit::Zero, Bit::Zero),
            BitState::Both1 => (Bit::One, Bit::One),
            BitState::Mixed => (Bit::Zero, Bit::One),
        }
    }
}

impl std::str::FromStr for BitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "00" => Ok(BitState::Both0),
            "11" => Ok(BitState::Both1),
            "0110" | "01/10" | "01" | "10" => Ok(BitState::Mixed),
            other => Err(Error::Usage(format!("unknown bit state `{other}` (expected 00, 11 or 0110)"))),
        }
    }
}

/// The public resistor pair `R0 = R`, `R1 = alpha * R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistorSet {
    r_low: f64,
    alpha: f64,
}

impl ResistorSet {
    pub fn new(r_low: f64, alpha: f64) -> Result<Self> {
        if !(r_low.is_finite() && r_low > 0.0) {
            return Err(Error::param("r", format!("resistance must be finite and > 0, got {r_low}")));
        }
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::param("alpha", format!("requires alpha > 1, got {alpha}")));
        }
        if alpha < ALPHA_WARN_BELOW {
            log::warn!("alpha = {alpha} is small; the error model assumes alpha >> 1");
        }
        Ok(Self { r_low, alpha })
    }

    pub fn r0(&self) -> f64 {
        self.r_low
    }

    pub fn r1(&self) -> f64 {
        self.alpha * self.r_low
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn resistor(&self, bit: Bit) -> f64 {
        match bit {
            Bit::Zero => self.r0(),
            Bit::One => self.r1(),
        }
    }

    pub fn loop_state(&self, alice: Bit, bob: Bit) -> LoopState {
        LoopState {
            bit_alice: alice,
            bit_bob: bob,
            r_alice: self.resistor(alice),
            r_bob: self.resistor(bob),
        }
    }
}

/// Resistors connected during one bit-exchange period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopState {
    pub bit_alice: Bit,
    pub bit_bob: Bit,
    pub r_alice: f64,
    pub r_bob: f64,
}

impl LoopState {
    pub fn r_parallel(&self) -> f64 {
        self.r_alice * self.r_bob / (self.r_alice + self.r_bob)
    }

    pub fn r_loop(&self) -> f64 {
        self.r_alice + self.r_bob
    }

    pub fn state(&self) -> BitState {
        BitState::of(self.bit_alice, self.bit_bob)
    }
}

/// Boltzmann constant and effective noise temperature.
///
/// In normalized mode the product `4 k T_eff` is pinned to 1 V²/(Hz·Ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConstants {
    pub k: f64,
    pub t_eff: f64,
    pub normalized: bool,
}

impl PhysicsConstants {
    pub fn si(t_eff: f64) -> Result<Self> {
        if !(t_eff.is_finite() && t_eff > 0.0) {
            return Err(Error::param("t_eff", format!("must be finite and > 0, got {t_eff}")));
        }
        Ok(Self {
            k: BOLTZMANN,
            t_eff,
            normalized: false,
        })
    }

    pub fn normalized() -> Self {
        Self {
            k: 0.25,
            t_eff: 1.0,
            normalized: true,
        }
    }

    pub fn four_kt(&self) -> f64 {
        4.0 * self.k * self.t_eff
    }
}

/// One-sided voltage noise density `4 k T_eff r` of a resistor.
pub fn generator_psd(r: f64, consts: &PhysicsConstants) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::param("r", format!("resistance must be finite and > 0, got {r}")));
    }
    Ok(consts.four_kt() * r)
}

/// Solve the single loop for the wire voltage `u_c` and loop current `i_c`.
pub fn channel_waveforms(u_a: &Waveform, u_b: &Waveform, state: &LoopState) -> Result<(Waveform, Waveform)> {
    if u_a.len() != u_b.len() {
        return Err(Error::LengthMismatch {
            left: u_a.len(),
            right: u_b.len(),
        });
    }
    if u_a.sample_rate() != u_b.sample_rate() {
        return Err(Error::SampleRateMismatch {
            left: u_a.sample_rate(),
            right: u_b.sample_rate(),
        });
    }
    let (mut u_c, mut i_c) = (Vec::with_capacity(u_a.len()), Vec::with_capacity(u_a.len()));
    channel_samples(u_a.samples(), u_b.samples(), state, &mut u_c, &mut i_c);
    let fs = u_a.sample_rate();
    Ok((Waveform::from_parts(u_c, fs), Waveform::from_parts(i_c, fs)))
}

pub(crate) fn channel_samples(ua: &[f64], ub: &[f64], state: &LoopState, u_c: &mut Vec<f64>, i_c: &mut Vec<f64>) {
    let (ra, rb) = (state.r_alice, state.r_bob);
    let inv_loop = 1.0 / (ra + rb);
    for (&a, &b) in ua.iter().zip(ub) {
        i_c.push((a - b) * inv_loop);
        u_c.push((a * rb + b * ra) * inv_loop);
    }
}

/// Exact (infinite-time) mean-square wire voltage and current for each bit state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelTable {
    /// Indexed by [`BitState::index`].
    pub voltage: [f64; 3],
    pub current: [f64; 3],
    pub bandwidth: f64,
}

impl LevelTable {
    pub fn voltage(&self, s: BitState) -> f64 {
        self.voltage[s.index()]
    }

    pub fn current(&self, s: BitState) -> f64 {
        self.current[s.index()]
    }

    pub fn voltage_psd(&self, s: BitState) -> f64 {
        self.voltage(s) / self.bandwidth
    }

    pub fn current_psd(&self, s: BitState) -> f64 {
        self.current(s) / self.bandwidth
    }

    /// Voltage 00 < 01/10 < 11 and current 11 < 01/10 < 00.
    pub fn is_ordered(&self) -> bool {
        let v = |s| self.voltage(s);
        let i = |s| self.current(s);
        v(BitState::Both0) < v(BitState::Mixed)
            && v(BitState::Mixed) < v(BitState::Both1)
            && i(BitState::Both1) < i(BitState::Mixed)
            && i(BitState::Mixed) < i(BitState::Both0)
    }
}

/// Mean-square levels for all three states from `4kT R_par B` and `4kT B / R_loop`.
pub fn theoretical_levels(resistors: &ResistorSet, consts: &PhysicsConstants, bandwidth: f64) -> Result<LevelTable> {
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::param("b_kljn", format!("bandwidth must be finite and > 0, got {bandwidth}")));
    }
    let mut voltage = [0.0; 3];
    let mut current = [0.0; 3];
    for s in BitState::ALL {
        let (a, b) = s.representative();
        let st = resistors.loop_state(a, b);
        voltage[s.index()] = consts.four_kt() * st.r_parallel() * bandwidth;
        current[s.index()] = consts.four_kt() * bandwidth / st.r_loop();
    }
    Ok(LevelTable {
        voltage,
        current,
        bandwidth,
    })
}

/// The 11-state current level as printed in the closed-form derivation,
/// `4kT B / ((1 + alpha) R)`. Reported next to the loop-law value for comparison;
/// nothing in the simulator uses it.
pub fn printed_current_11_level(resistors: &ResistorSet, consts: &PhysicsConstants, bandwidth: f64) -> f64 {
    consts.four_kt() * bandwidth / ((1.0 + resistors.alpha()) * resistors.r0())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wf(v: Vec<f64>) -> Waveform {
        Waveform::new(v, 1.0).unwrap()
    }

    fn loop_with(ra: f64, rb: f64) -> LoopState {
        LoopState {
            bit_alice: Bit::Zero,
            bit_bob: Bit::One,
            r_alice: ra,
            r_bob: rb,
        }
    }

    #[test]
    fn generator_psd_values() {
        let n = PhysicsConstants::normalized();
        assert_eq!(generator_psd(2.0, &n).unwrap(), 2.0);
        assert!(generator_psd(0.0, &n).is_err());
        let si = PhysicsConstants::si(1e18).unwrap();
        // 4 * 1.380649e-23 * 1e18 * 1e4 = 0.5522596
        let v = generator_psd(1e4, &si).unwrap();
        assert!((v - 0.552_259_6).abs() < 1e-12);
    }

    #[test]
    fn voltage_divider_cases() {
        let (u, i) = channel_waveforms(&wf(vec![1.0; 4]), &wf(vec![0.0; 4]), &loop_with(1.0, 1.0)).unwrap();
        assert!(u.samples().iter().all(|&x| x == 0.5));
        assert!(i.samples().iter().all(|&x| x == 0.5));

        let (u, i) = channel_waveforms(&wf(vec![0.3; 3]), &wf(vec![0.3; 3]), &loop_with(2.0, 7.0)).unwrap();
        assert!(i.samples().iter().all(|&x| x == 0.0));
        assert!(u.samples().iter().all(|&x| (x - 0.3).abs() < 1e-15));

        let (u, i) = channel_waveforms(&wf(vec![0.0; 2]), &wf(vec![1.0; 2]), &loop_with(3.0, 1.0)).unwrap();
        assert!(i.samples().iter().all(|&x| x == -0.25));
        assert!(u.samples().iter().all(|&x| x == 0.75));
    }

    #[test]
    fn channel_rejects_mismatch() {
        let st = loop_with(1.0, 1.0);
        assert!(matches!(
            channel_waveforms(&wf(vec![0.0; 2]), &wf(vec![0.0; 3]), &st),
            Err(Error::LengthMismatch { .. })
        ));
        let b = Waveform::new(vec![0.0; 2], 2.0).unwrap();
        assert!(channel_waveforms(&wf(vec![0.0; 2]), &b, &st).is_err());
    }

    #[test]
    fn level_table_normalized_alpha_10() {
        let r = ResistorSet::new(1.0, 10.0).unwrap();
        let t = theoretical_levels(&r, &PhysicsConstants::normalized(), 1.0).unwrap();
        assert!((t.current(BitState::Both1) - 0.05).abs() < 1e-15);
        assert!((t.current(BitState::Mixed) - 1.0 / 11.0).abs() < 1e-15);
        assert!((t.current(BitState::Both0) - 0.5).abs() < 1e-15);
        assert!((t.voltage(BitState::Both0) - 0.5).abs() < 1e-15);
        assert!((t.voltage(BitState::Mixed) - 10.0 / 11.0).abs() < 1e-15);
        assert!((t.voltage(BitState::Both1) - 5.0).abs() < 1e-15);
        assert!(t.is_ordered());
        // Printed form differs by (1 + alpha) / (2 alpha).
        let printed = printed_current_11_level(&r, &PhysicsConstants::normalized(), 1.0);
        assert!((printed - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn near_degenerate_alpha_still_ordered() {
        let r = ResistorSet::new(1.0, 1.0 + 1e-6).unwrap();
        let t = theoretical_levels(&r, &PhysicsConstants::normalized(), 1.0).unwrap();
        assert!(t.is_ordered());
        let spread = t.voltage(BitState::Both1) - t.voltage(BitState::Both0);
        assert!(spread < 1e-5);
    }

    #[test]
    fn resistor_set_validation() {
        assert!(ResistorSet::new(1.0, 0.5).unwrap_err().to_string().contains("alpha > 1"));
        assert!(ResistorSet::new(1.0, 1.0).is_err());
        assert!(ResistorSet::new(0.0, 10.0).is_err());
        assert!(ResistorSet::new(-1.0, 10.0).is_err());
        let r = ResistorSet::new(2.0, 5.0).unwrap();
        assert_eq!(r.r1(), 10.0);
        let st = r.loop_state(Bit::One, Bit::Zero);
        assert_eq!(st.r_loop(), 12.0);
        assert!((st.r_parallel() - 20.0 / 12.0).abs() < 1e-15);
        assert_eq!(st.state(), BitState::Mixed);
    }

    #[test]
    fn bit_state_parsing() {
        assert_eq!("00".parse::<BitState>().unwrap(), BitState::Both0);
        assert_eq!("11".parse::<BitState>().unwrap(), BitState::Both1);
        assert_eq!("0110".parse::<BitState>().unwrap(), BitState::Mixed);
        assert!("2".parse::<BitState>().is_err());
    }
}
