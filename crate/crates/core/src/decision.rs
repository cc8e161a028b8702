//! Threshold bit interpretation and the combined voltage/current verdict.

use serde::{Deserialize, Serialize};

use crate::analytic::ThresholdFractions;
use crate::circuit::{BitState, LevelTable};
use crate::error::{Error, Result};

/// Reading of one mean-square measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interpretation {
    #[serde(rename = "00")]
    B00,
    #[serde(rename = "11")]
    B11,
    #[serde(rename = "01/10")]
    Secure0110,
}

impl Interpretation {
    pub const ALL: [Interpretation; 3] = [Interpretation::B00, Interpretation::B11, Interpretation::Secure0110];

    /// Column index matching [`BitState::index`].
    pub fn index(self) -> usize {
        match self {
            Interpretation::B00 => 0,
            Interpretation::B11 => 1,
            Interpretation::Secure0110 => 2,
        }
    }

    pub fn as_state(self) -> BitState {
        match self {
            Interpretation::B00 => BitState::Both0,
            Interpretation::B11 => BitState::Both1,
            Interpretation::Secure0110 => BitState::Mixed,
        }
    }
}

/// Verdict of the combined method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CombinedOutcome {
    KeepSecure,
    DiscardInsecure00,
    DiscardInsecure11,
    DiscardMixed,
    AlarmConflict,
}

impl CombinedOutcome {
    pub const ALL: [CombinedOutcome; 5] = [
        CombinedOutcome::KeepSecure,
        CombinedOutcome::DiscardInsecure00,
        CombinedOutcome::DiscardInsecure11,
        CombinedOutcome::DiscardMixed,
        CombinedOutcome::AlarmConflict,
    ];

    pub fn index(self) -> usize {
        match self {
            CombinedOutcome::KeepSecure => 0,
            CombinedOutcome::DiscardInsecure00 => 1,
            CombinedOutcome::DiscardInsecure11 => 2,
            CombinedOutcome::DiscardMixed => 3,
            CombinedOutcome::AlarmConflict => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CombinedOutcome::KeepSecure => "KEEP_SECURE",
            CombinedOutcome::DiscardInsecure00 => "DISCARD_INSECURE_00",
            CombinedOutcome::DiscardInsecure11 => "DISCARD_INSECURE_11",
            CombinedOutcome::DiscardMixed => "DISCARD_MIXED",
            CombinedOutcome::AlarmConflict => "ALARM_CONFLICT",
        }
    }
}

/// Absolute cut points on both measured quantities.
///
/// Voltage reads 00 below `v_low_cut` and 11 above `v_high_cut`; current
/// reads 11 below `i_low_cut` and 00 above `i_high_cut`. Values on a cut are
/// inside the secure band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecisionBands {
    pub v_low_cut: f64,
    pub v_high_cut: f64,
    pub i_low_cut: f64,
    pub i_high_cut: f64,
}

/// Place the cuts a fraction of the guarded exact level away from it.
pub fn make_bands(levels: &LevelTable, fracs: &ThresholdFractions) -> Result<DecisionBands> {
    let v00 = levels.voltage(BitState::Both0);
    let v11 = levels.voltage(BitState::Both1);
    let i11 = levels.current(BitState::Both1);
    let i00 = levels.current(BitState::Both0);
    let bands = DecisionBands {
        v_low_cut: v00 + fracs.beta * v00,
        v_high_cut: v11 - fracs.delta * v11,
        i_low_cut: i11 + fracs.lambda * i11,
        i_high_cut: i00 - fracs.rho * i00,
    };
    if !(bands.v_low_cut < bands.v_high_cut) {
        return Err(Error::EmptySecureBand {
            side: "voltage",
            low_cut: bands.v_low_cut,
            high_cut: bands.v_high_cut,
        });
    }
    if !(bands.i_low_cut < bands.i_high_cut) {
        return Err(Error::EmptySecureBand {
            side: "current",
            low_cut: bands.i_low_cut,
            high_cut: bands.i_high_cut,
        });
    }
    Ok(bands)
}

pub fn interpret_current(msi: f64, bands: &DecisionBands) -> Interpretation {
    if msi < bands.i_low_cut {
        Interpretation::B11
    } else if msi > bands.i_high_cut {
        Interpretation::B00
    } else {
        Interpretation::Secure0110
    }
}

pub fn interpret_voltage(msv: f64, bands: &DecisionBands) -> Interpretation {
    if msv < bands.v_low_cut {
        Interpretation::B00
    } else if msv > bands.v_high_cut {
        Interpretation::B11
    } else {
        Interpretation::Secure0110
    }
}

/// Keep only when both readings are secure; an insecure reading on either
/// side names the discard, and opposite insecure readings raise an alarm.
pub fn combine(v: Interpretation, i: Interpretation) -> CombinedOutcome {
    use CombinedOutcome::*;
    use Interpretation::*;
    match (v, i) {
        (Secure0110, Secure0110) => KeepSecure,
        (B00, B00) | (B00, Secure0110) | (Secure0110, B00) => DiscardInsecure00,
        (B11, B11) | (B11, Secure0110) | (Secure0110, B11) => DiscardInsecure11,
        (B00, B11) | (B11, B00) => AlarmConflict,
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn current_reading_is_a_two_cut_step(lo in 0.0f64..1.0, width in 1e-6f64..1.0, a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let bands = DecisionBands { v_low_cut: 0.0, v_high_cut: 1.0, i_low_cut: lo, i_high_cut: lo + width };
            let (x, y) = if a <= b { (a, b) } else { (b, a) };
            // Ordering B11 < Secure < B00 along msi is monotone.
            let rank = |i: Interpretation| match i { Interpretation::B11 => 0, Interpretation::Secure0110 => 1, Interpretation::B00 => 2 };
            prop_assert!(rank(interpret_current(x, &bands)) <= rank(interpret_current(y, &bands)));
        }

        #[test]
        fn every_measurement_pair_has_one_outcome(msv in 0.0f64..10.0, msi in 0.0f64..1.0) {
            let bands = DecisionBands { v_low_cut: 0.75, v_high_cut: 2.5, i_low_cut: 0.075, i_high_cut: 0.25 };
            let v = interpret_voltage(msv, &bands);
            let i = interpret_current(msi, &bands);
            let out = combine(v, i);
            prop_assert!(CombinedOutcome::ALL.contains(&out));
            prop_assert_eq!(out == CombinedOutcome::KeepSecure, v == Interpretation::Secure0110 && i == Interpretation::Secure0110);
        }
    }
}
