//! Exact mean-square wire levels for each bit state, next to a measured run.

use kljn::circuit::{theoretical_levels, BitState, PhysicsConstants, ResistorSet};
use kljn::experiment::cmd_levels;
use kljn::SystemConfig;

fn main() -> kljn::Result<()> {
    let res = ResistorSet::new(1.0, 10.0)?;
    let table = theoretical_levels(&res, &PhysicsConstants::normalized(), 1.0)?;
    for s in [BitState::Both0, BitState::Mixed, BitState::Both1] {
        println!("{:>6}  <u²> = {:.4}  <i²> = {:.4}", s.label(), table.voltage(s), table.current(s));
    }
    println!();

    let cfg = SystemConfig {
        alpha: 10.0,
        calibration_samples: 1 << 21,
        ..SystemConfig::default()
    };
    println!("{}", cmd_levels(&cfg)?);

    // SI units with an enhanced noise temperature.
    let si = PhysicsConstants::si(1e18)?;
    let t = theoretical_levels(&ResistorSet::new(1e4, 10.0)?, &si, 1e3)?;
    println!("\nSI, R = 10 kΩ, T_eff = 1e18 K, B = 1 kHz: <u²>_00 = {:.4e} V²", t.voltage(BitState::Both0));
    Ok(())
}
