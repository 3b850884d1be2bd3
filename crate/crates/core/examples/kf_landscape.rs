//! Fisher growth rate over the (omega, epsilon) plane for a fixed homodyne
//! angle, written as CSV. Points outside the normal phase are left empty.

use gdyne::fisher::kf_landscape;
use gdyne::MeasurementParams;

fn main() -> gdyne::Result<()> {
    let m = MeasurementParams::homodyne(0.583, 1.0)?;
    let omegas: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
    let epsilons: Vec<f64> = (0..=40).map(|i| i as f64 * 3.0 / 100.0).collect();
    println!("omega,epsilon,k_F,status");
    for pt in kf_landscape(&omegas, &epsilons, &m, 1.0, 1) {
        let k = pt.k_f.map(|k| k.to_string()).unwrap_or_default();
        println!("{},{},{k},{}", pt.omega, pt.epsilon, pt.status);
    }
    Ok(())
}
