//! Conditional trajectories under homodyne detection and the comparison of
//! their ensemble photocurrent variance with the deterministic moment
//! equations.

use gdyne::conditional::{simulate_ensemble, simulate_trajectory, EnsembleOptions, GaussianState};
use gdyne::moments::moments_at;
use gdyne::{MeasurementParams, SystemParams};

fn main() -> gdyne::Result<()> {
    let p = SystemParams::near_boundary(0.2, 0.03, 1.0)?;
    let m = MeasurementParams::homodyne(0.6, 0.8)?;

    let tr = simulate_trajectory(&p, &m, &GaussianState::vacuum(), 20.0, 1e-2, 1)?;
    for s in tr.samples.iter().step_by(200) {
        println!("t = {:5.1}  r = ({:+.3}, {:+.3})  y = ({:+.3}, {:+.3})", s.t, s.r[0], s.r[1], s.y[0], s.y[1]);
    }

    let opts = EnsembleOptions { trajectories: 1000, dt: 1e-2, seed: 42, probe_times: vec![10.0, 20.0, 50.0], threads: 1 };
    for st in simulate_ensemble(&p, &m, &opts)? {
        let want = moments_at(&p, &m, st.t, 1e-2)?.eyy;
        println!("t = {:4.0}: ensemble {:.4} +- {:.4}, moments {:.4}", st.t, st.yy_mean, st.yy_se, want);
    }
    Ok(())
}
