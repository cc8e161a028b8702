//! Spectrum of the squared wire current against the triangular prediction.

use kljn::circuit::BitState;
use kljn::experiment::cmd_spectra;
use kljn::SystemConfig;

fn main() -> kljn::Result<()> {
    let cfg = SystemConfig {
        oversample: 8,
        spectrum_samples: 1 << 20,
        spectrum_bins: 65,
        force_state: Some(BitState::Both1),
        ..SystemConfig::default()
    };
    let out = cmd_spectra(&cfg)?;
    println!("state {}  S_i = {:.4e} A²/Hz", out.state.label(), out.current_psd);
    println!("{:>7} {:>12} {:>12}", "f", "measured", "theory");
    for ((f, e), t) in out.frequencies.iter().zip(&out.empirical).zip(&out.theory) {
        if *f <= 2.5 * cfg.b_kljn {
            println!("{f:>7.3} {e:>12.4e} {t:>12.4e}");
        }
    }
    println!("power above 2B: {:.2e} of total", out.out_of_support_fraction);
    Ok(())
}
