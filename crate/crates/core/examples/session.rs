//! A full key-exchange session with the combined method.

use kljn::experiment::cmd_session;
use kljn::{Mode, SystemConfig};

fn main() -> kljn::Result<()> {
    let cfg = SystemConfig {
        gamma: 20.0,
        n_periods: 20_000,
        mode: Mode::Combined,
        ..SystemConfig::default()
    };
    let out = cmd_session(&cfg)?;
    let r = &out.report;
    println!("config {}", out.config_hash);
    println!("periods {}  kept {}  discard rate {:.3}", r.n_periods, r.kept, r.discard_rate);
    println!("fidelity {:?}", r.fidelity.rate);
    println!("current 11 errors   {} / {}", r.eps_hat_i_11.count, r.eps_hat_i_11.trials);
    println!("combined 11 errors  {} / {}", r.eps_hat_combined_11.count, r.eps_hat_combined_11.trials);
    println!("key bits {}  mismatches {}", out.key_bits, out.key_mismatches);
    println!("alice {}...", &out.alice_key_hex[..out.alice_key_hex.len().min(32)]);
    println!("bob   {}...", &out.bob_key_hex[..out.bob_key_hex.len().min(32)]);
    Ok(())
}
