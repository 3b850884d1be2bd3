//! Optimal general-dyne measurement near the boundary and its efficiency
//! relative to the global quantum Fisher information rate.

use gdyne::fisher::{optimize_measurement, OptimizeOptions};
use gdyne::qfi::qfi_rate_analytic;
use gdyne::SystemParams;

fn main() -> gdyne::Result<()> {
    let p = SystemParams::near_boundary(0.2, 0.03, 1.0)?;
    for eta in [1.0, 0.8, 0.5] {
        let r = optimize_measurement(&p, eta, &OptimizeOptions::default())?;
        println!("eta = {eta}: s = {:.4}, phi = {:.4}, k_F = {:.2} ({} evaluations)", r.s_opt, r.phi_opt, r.k_f_opt, r.trace.len());
    }

    println!("\nomega,delta_eps,k_F_opt/k_G");
    for w in [0.2, 0.5, 1.0] {
        for de in [0.1, 0.05, 0.02, 0.01] {
            let p = SystemParams::near_boundary(w, de, 1.0)?;
            let k_f = optimize_measurement(&p, 1.0, &OptimizeOptions::default())?.k_f_opt;
            println!("{w},{de},{:.5}", k_f / qfi_rate_analytic(&p)?.k_g);
        }
    }
    Ok(())
}
