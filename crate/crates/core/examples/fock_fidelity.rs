//! Truncated Fock-space cross-check of the quantum Fisher information: the
//! fidelity between two nearby frequencies, evolved jointly with the
//! generalized master equation, gives I_G by finite differences.

use gdyne::fock::{generalized_me_fidelity, qfi_finite_difference, FockOptions};
use gdyne::qfi::qfi_time_domain;
use gdyne::SystemParams;

fn main() -> gdyne::Result<()> {
    let p = SystemParams::unit(1.0, 0.9)?;
    let opts = FockOptions { dim: 60, ..Default::default() };
    let fid = generalized_me_fidelity(&p, 1.01, 0.99, 10.0, &opts, 200)?;
    for (t, f) in fid.times.iter().zip(&fid.fidelity) {
        println!("t = {t:4.1}  F = {f:.8}");
    }
    let fd = qfi_finite_difference(&p, 1e-3, 20.0, &opts, 500)?;
    let exact = qfi_time_domain(&p, 20.0, 4)?;
    for (i, t) in fd.times.iter().enumerate() {
        println!("t = {t:4.1}  Fock {:.5}  Langevin {:.5}", fd.extrapolated[i], exact.i_g[i]);
    }
    println!("Fock growth rate {:.5}", fd.fit.slope);
    Ok(())
}
