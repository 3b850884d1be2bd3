mod support;

use std::f64::consts::FRAC_PI_4;

use gdyne::conditional::{steady_covariance, SteadyOptions};
use gdyne::fisher::{fisher_information, kf_landscape, optimize_measurement, steady_growth_rate, FisherOptions, OptimizeOptions};
use gdyne::model::{drift_matrix, drift_omega_derivative};
use gdyne::qfi::qfi_rate_analytic;
use gdyne::{Error, MeasurementParams, SystemParams};
use nalgebra::{Matrix2, Matrix4, Vector4};
use proptest::prelude::*;
use support::{epsilon_below, lyapunov};

/// Solves `P X + X Qᵀ = −C` for a general 2×2 `X` (column-major vectorisation).
fn sylvester(p: &Matrix2<f64>, q: &Matrix2<f64>, c: &Matrix2<f64>) -> Matrix2<f64> {
    let id = Matrix2::<f64>::identity();
    let k: Matrix4<f64> = id.kronecker(p) + q.kronecker(&id);
    let rhs = Vector4::new(-c[(0, 0)], -c[(1, 0)], -c[(0, 1)], -c[(1, 1)]);
    let x = k.lu().solve(&rhs).unwrap();
    Matrix2::new(x[0], x[2], x[1], x[3])
}

/// Stationary Fisher growth rate rebuilt from the stationary moment
/// equations, starting from a time-integrated conditional covariance.
fn oracle_k_f(p: &SystemParams, m: &MeasurementParams) -> f64 {
    let (eta, kappa) = (m.eta(), p.kappa());
    let sigma = steady_covariance(p, m, &SteadyOptions { tol: 1e-13, ..Default::default() }).unwrap().sigma.to_matrix();
    let a = drift_matrix(p);
    let da = drift_omega_derivative();
    let b = m.b_matrix().to_matrix();
    let b2 = b * b;
    let e = sigma - Matrix2::identity();
    let at = a - e * b2 * (eta * kappa);
    let dsigma = lyapunov(&at, &(da * sigma + sigma * da.transpose()));
    let err = lyapunov(&a, &(e * b2 * e * (0.5 * kappa * eta)));
    let x = sylvester(&at, &a, &(da * err + dsigma * b2 * e * (0.5 * kappa * eta)));
    let d = lyapunov(&at, &(da * x.transpose() + x * da.transpose() + dsigma * b2 * dsigma * (0.5 * kappa * eta)));
    2.0 * eta * kappa * (b2 * d).trace()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn growth_rate_matches_independent_solve(
        w in 0.05f64..1.5, u in 0.1f64..0.95, s in 0.0f64..1.0, phi in 0.0f64..1.5, eta in 0.05f64..1.0,
    ) {
        let p = SystemParams::unit(w, epsilon_below(w, 1.0, u)).unwrap();
        let m = MeasurementParams::new(s, phi, eta).unwrap();
        let got = steady_growth_rate(&p, &m).unwrap();
        let want = oracle_k_f(&p, &m);
        prop_assert!((got - want).abs() < 1e-6 * want.abs().max(1e-9), "{got} vs {want}");
    }
}

#[test]
fn fisher_series_is_monotone_and_linear() {
    for (w, de, phi, s, eta) in [(0.2, 0.03, 0.583, 0.0, 1.0), (0.5, 0.1, 0.3, 0.5, 0.7), (1.0, 0.4, 0.2, 0.0, 0.5)] {
        let p = SystemParams::near_boundary(w, de, 1.0).unwrap();
        let m = MeasurementParams::new(s, phi, eta).unwrap();
        let r = fisher_information(&p, &m, &FisherOptions { t_end: 600.0, ..Default::default() }).unwrap();
        assert!(r.fisher.windows(2).all(|v| v[1] >= v[0]));
        assert!((r.k_f_fit - r.k_f).abs() < 1e-2 * r.k_f, "fit {} vs {}", r.k_f_fit, r.k_f);
        let algebraic = steady_growth_rate(&p, &m).unwrap();
        assert!((r.k_f - algebraic).abs() < 1e-6 * algebraic, "{} vs {algebraic}", r.k_f);
    }
}

#[test]
fn short_runs_report_no_convergence() {
    let p = SystemParams::near_boundary(0.2, 0.03, 1.0).unwrap();
    let m = MeasurementParams::homodyne(0.583, 1.0).unwrap();
    let r = fisher_information(&p, &m, &FisherOptions { t_end: 5.0, ..Default::default() });
    assert!(matches!(r, Err(Error::NotConverged { .. })));
}

#[test]
fn optimizer_stays_in_the_box_and_is_deterministic() {
    let p = SystemParams::near_boundary(0.3, 0.05, 1.0).unwrap();
    let a = optimize_measurement(&p, 0.9, &OptimizeOptions::default()).unwrap();
    let b = optimize_measurement(&p, 0.9, &OptimizeOptions::default()).unwrap();
    assert_eq!(a.trace, b.trace);
    for t in &a.trace {
        assert!(t.phi > 0.0 && t.phi <= FRAC_PI_4 && (0.0..=1.0).contains(&t.s), "{t:?}");
    }
    let best = a.trace.iter().map(|t| t.k_f).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(best, a.k_f_opt);
}

#[test]
fn optimum_is_stable_under_grid_refinement() {
    let p = SystemParams::near_boundary(0.2, 0.03, 1.0).unwrap();
    for eta in [1.0, 0.8] {
        let base = optimize_measurement(&p, eta, &OptimizeOptions::default()).unwrap();
        let fine = OptimizeOptions { grid_phi: 50, grid_s: 21, zoom_levels: 5, ..Default::default() };
        let fine = optimize_measurement(&p, eta, &fine).unwrap();
        assert!((base.phi_opt - fine.phi_opt).abs() < 1e-4, "{} vs {}", base.phi_opt, fine.phi_opt);
        assert!((base.s_opt - fine.s_opt).abs() < 1e-4, "{} vs {}", base.s_opt, fine.s_opt);
        assert!((base.k_f_opt - fine.k_f_opt).abs() < 1e-6 * fine.k_f_opt);
    }
}

#[test]
fn optimum_respects_global_bound() {
    for (w, de) in [(0.2, 0.03), (0.5, 0.02), (1.0, 0.1), (0.1, 0.2)] {
        let p = SystemParams::near_boundary(w, de, 1.0).unwrap();
        let k_f = optimize_measurement(&p, 1.0, &OptimizeOptions::default()).unwrap().k_f_opt;
        let k_g = qfi_rate_analytic(&p).unwrap().k_g;
        assert!(k_f <= k_g * (1.0 + 1e-3), "({w}, {de}): {k_f} > {k_g}");
    }
}

#[test]
fn landscape_flags_points_outside_the_phase() {
    let m = MeasurementParams::homodyne(0.5, 1.0).unwrap();
    let pts = kf_landscape(&[0.2, 0.4], &[0.3, 0.9], &m, 1.0, 2);
    assert_eq!(pts.len(), 4);
    assert!(pts[0].k_f.is_some() && pts[0].status == "ok");
    assert!(pts[1].k_f.is_none() && pts[1].status.contains("outside the normal phase"));
    assert_eq!((pts[2].omega, pts[2].epsilon), (0.4, 0.3));
}

#[test]
fn optimization_needs_a_signal() {
    let p = SystemParams::near_boundary(0.2, 0.03, 1.0).unwrap();
    assert_eq!(optimize_measurement(&p, 0.0, &OptimizeOptions::default()).unwrap_err(), Error::EtaZero);
}
