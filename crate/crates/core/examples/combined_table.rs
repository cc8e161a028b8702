//! Decision bands and the combined voltage/current verdict table.

use kljn::decision::{combine, Interpretation};
use kljn::SystemConfig;

fn main() -> kljn::Result<()> {
    let cfg = SystemConfig {
        alpha: 10.0,
        ..SystemConfig::default()
    };
    let b = cfg.bands()?;
    println!("voltage secure band ({:.4}, {:.4})", b.v_low_cut, b.v_high_cut);
    println!("current secure band ({:.4}, {:.4})\n", b.i_low_cut, b.i_high_cut);

    let all = [Interpretation::B00, Interpretation::B11, Interpretation::Secure0110];
    print!("{:>10}", "v \\ i");
    for i in all {
        print!(" {:>20}", i.as_state().label());
    }
    println!();
    for v in all {
        print!("{:>10}", v.as_state().label());
        for i in all {
            print!(" {:>20}", combine(v, i).name());
        }
        println!();
    }
    Ok(())
}
