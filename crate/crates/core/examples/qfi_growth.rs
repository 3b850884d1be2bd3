//! Global quantum Fisher information growth rate from the closed form and from
//! the time-domain Langevin solution.

use gdyne::qfi::{qfi_rate_analytic, qfi_rate_time_domain, qfi_time_domain};
use gdyne::SystemParams;

fn main() -> gdyne::Result<()> {
    for (w, e) in [(0.2, 0.45), (0.5, 0.6), (1.0, 0.9)] {
        let p = SystemParams::unit(w, e)?;
        let k = qfi_rate_analytic(&p)?;
        let fit = qfi_rate_time_domain(&p)?;
        println!("(omega, epsilon) = ({w}, {e}): k_G = {:.6}, time-domain slope = {:.6}", k.k_g, fit.slope);
    }
    let p = SystemParams::unit(0.5, 0.3)?;
    let series = qfi_time_domain(&p, 20.0, 10)?;
    for (t, i) in series.times.iter().zip(&series.i_g) {
        println!("t = {t:5.1}  I_G = {i:.5}");
    }
    Ok(())
}
