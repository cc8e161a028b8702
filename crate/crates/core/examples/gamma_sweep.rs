//! Monte Carlo error rates against the closed forms over a range of gamma.

use kljn::circuit::BitState;
use kljn::experiment::{cmd_sweep, sweep_table};
use kljn::{Mode, SystemConfig};

fn main() -> kljn::Result<()> {
    let cfg = SystemConfig {
        n_periods: 20_000,
        ..SystemConfig::default()
    };
    let rows = cmd_sweep(&cfg, &[10.0, 20.0, 30.0, 40.0, 50.0], Mode::Current, Some(BitState::Both1))?;
    print!("{}", sweep_table(&rows));
    Ok(())
}
