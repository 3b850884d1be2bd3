//! Variance of the integrated photocurrent at a fixed time as a function of
//! the oscillator frequency. The minimum moves towards the BECP as the drive
//! approaches the phase boundary.

use gdyne::model::becp_from_angle;
use gdyne::moments::photocurrent_variance_profile;
use gdyne::MeasurementParams;

fn main() -> gdyne::Result<()> {
    let m = MeasurementParams::homodyne(0.6, 0.8)?;
    let omegas: Vec<f64> = (0..=90).map(|i| 0.15 + i as f64 * 1e-3).collect();
    let (w_be, _) = becp_from_angle(0.6, 1.0)?;
    println!("BECP frequency {w_be:.5}");
    for de in [0.03, 0.02, 0.01, 0.005] {
        let prof = photocurrent_variance_profile(&omegas, de, 1.0, &m, 100.0, 1e-2, 1)?;
        println!("delta_eps = {de}: minimum E[y^T y] = {:.4} at omega = {:.5}", prof.min_value, prof.argmin);
    }
    Ok(())
}
