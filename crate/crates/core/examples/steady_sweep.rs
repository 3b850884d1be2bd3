//! Conditional steady-state covariance across the normal phase, for an
//! unmonitored mode and for ideal homodyne detection.

use gdyne::conditional::{steady_covariance, SteadyOptions};
use gdyne::model::unconditional_steady_covariance;
use gdyne::{MeasurementParams, SystemParams};

fn main() -> gdyne::Result<()> {
    let m = MeasurementParams::homodyne(0.6, 1.0)?;
    println!("omega,sigma_p_unconditional,sigma_p_conditional,det_conditional");
    for i in 0..=10 {
        let w = 0.1 + 0.05 * i as f64;
        let p = SystemParams::near_boundary(w, 0.05, 1.0)?;
        let s0 = unconditional_steady_covariance(&p)?;
        let s = steady_covariance(&p, &m, &SteadyOptions::default())?.sigma;
        println!("{w:.2},{:.6},{:.6},{:.9}", s0.pp, s.pp, s.det());
    }
    Ok(())
}
