//! Closed-form error probabilities and the Rice upcrossing rate behind them.

use kljn::analytic::{
    epsilon_combined, epsilon_current_11, epsilon_voltage, upcrossing_rate_flat, upcrossing_rate_via_rice,
};
use kljn::estimator::AveragingWindow;

fn main() -> kljn::Result<()> {
    let frac = 0.5;
    println!("{:>6} {:>12} {:>12} {:>12} {:>8}", "gamma", "eps_i", "eps_u", "combined", "reliable");
    for gamma in [5.0, 10.0, 20.0, 50.0, 100.0, 200.0] {
        let ei = epsilon_current_11(frac, gamma)?;
        let ev = epsilon_voltage(frac, gamma)?;
        let ec = epsilon_combined(frac, frac, gamma)?;
        println!("{gamma:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>8}", ei.value, ev.value, ec.value, ec.reliable);
    }

    let w = AveragingWindow::new(50.0, 1.0)?;
    let closed = upcrossing_rate_flat(&w, frac);
    let composed = upcrossing_rate_via_rice(&w, frac, 0.02)?;
    println!("\nupcrossing rate at gamma = 50: {closed:.6e} /s (closed), {composed:.6e} /s (Rice)");
    println!("rate x tau = {:.4e}", closed * w.tau);
    Ok(())
}
