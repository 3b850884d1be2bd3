//! Locates the divergence of the conditional covariance on the phase boundary
//! for several detection efficiencies and compares it with the BECP formula.

use gdyne::conditional::{divergence_scan, locate_divergence, SteadyOptions};
use gdyne::model::becp_from_angle;
use gdyne::MeasurementParams;

fn main() -> gdyne::Result<()> {
    let phi = 0.6;
    let (w_be, e_be) = becp_from_angle(phi, 1.0)?;
    println!("BECP for phi = {phi}: omega = {w_be:.5}, epsilon = {e_be:.5}");
    let omegas: Vec<f64> = (0..=12).map(|i| 0.188 + i as f64 * 1e-3).collect();
    for eta in [0.3, 0.6, 1.0] {
        let m = MeasurementParams::homodyne(phi, eta)?;
        let scan = divergence_scan(&omegas, 0.0, 1.0, &m, &SteadyOptions::default(), 1)?;
        let diverged = scan.iter().filter(|p| p.diverged()).count();
        match locate_divergence(&scan) {
            Some(w) => println!("eta = {eta}: largest [Sigma]_p at omega = {w:.3} ({diverged} points flagged as diverged)"),
            None => println!("eta = {eta}: no usable scan point"),
        }
    }
    Ok(())
}
