//! Fisher information of the photocurrent record about the frequency. The
//! time-resolved curve approaches a straight line whose slope matches the
//! stationary growth rate.

use gdyne::fisher::{fisher_information, steady_growth_rate, FisherOptions};
use gdyne::{MeasurementParams, SystemParams};

fn main() -> gdyne::Result<()> {
    let p = SystemParams::near_boundary(0.2, 0.03, 1.0)?;
    let m = MeasurementParams::homodyne(0.583, 1.0)?;
    let r = fisher_information(&p, &m, &FisherOptions { t_end: 600.0, ..Default::default() })?;
    for (t, f) in r.times.iter().zip(&r.fisher).step_by(60) {
        println!("t = {t:6.1}  F = {f:.4e}");
    }
    println!("stationary rate {:.3}, fitted slope {:.3} (r2 {:.6})", r.k_f, r.k_f_fit, r.fit_r2);
    println!("algebraic rate {:.3}", steady_growth_rate(&p, &m)?);
    Ok(())
}
