mod support;

use std::f64::consts::FRAC_PI_4;

use gdyne::linalg::rotation;
use gdyne::model::{
    backaction_functional, becp_from_angle, drift_matrix, first_order_correction, measurement_matrix_b, squeezing_angle,
    unconditional_steady_covariance,
};
use gdyne::{Error, MeasurementParams, SystemParams};
use nalgebra::Matrix2;
use proptest::prelude::*;
use support::{epsilon_below, lyapunov, unconditional};

fn normal_phase() -> impl Strategy<Value = SystemParams> {
    (0.01f64..3.0, 0.0f64..0.999, 0.2f64..3.0).prop_map(|(w, u, k)| SystemParams::new(w * k, epsilon_below(w * k, k, u), k).unwrap())
}

proptest! {
    #[test]
    fn steady_covariance_solves_lyapunov(p in normal_phase()) {
        let s = unconditional_steady_covariance(&p).unwrap().to_matrix();
        let a = drift_matrix(&p);
        let residual = a * s + s * a.transpose() + Matrix2::identity() * p.kappa();
        prop_assert!(residual.norm() < 1e-10 * s.norm().max(1.0), "residual {}", residual.norm());
        let oracle = unconditional(p.omega(), p.epsilon(), p.kappa());
        prop_assert!((s - oracle).norm() < 1e-9 * oracle.norm());
    }

    #[test]
    fn steady_state_respects_uncertainty(p in normal_phase()) {
        let det = unconditional_steady_covariance(&p).unwrap().det();
        prop_assert!(det >= 1.0 - 1e-12, "det {det}");
        if p.epsilon() > 1e-3 {
            prop_assert!(det > 1.0);
        }
    }

    #[test]
    fn becp_round_trip(phi in 0.01f64..(FRAC_PI_4 - 0.01), k in 0.2f64..3.0) {
        let (w, e) = becp_from_angle(phi, k).unwrap();
        let p = SystemParams::new(w, 0.0, k).unwrap();
        prop_assert!((squeezing_angle(&p) - phi).abs() < 1e-10);
        prop_assert!((e - p.epsilon_c()).abs() < 1e-12 * e);
    }

    #[test]
    fn backaction_matches_rotated_product(p in normal_phase(), phi in 0.0f64..FRAC_PI_4) {
        let th = squeezing_angle(&p);
        let r = rotation(th);
        let s_bar = r * unconditional(p.omega(), p.epsilon(), p.kappa()) * r.transpose() - Matrix2::identity();
        let b = measurement_matrix_b(&MeasurementParams::homodyne(phi, 1.0).unwrap()).to_matrix();
        let b_bar = r * b * r.transpose();
        let oracle = s_bar * b_bar * b_bar * s_bar;
        let got = backaction_functional(&p, phi).unwrap().to_matrix();
        prop_assert!((got - oracle).norm() < 1e-8 * oracle.norm().max(1.0));
    }

    #[test]
    fn backaction_is_positive_semidefinite(p in normal_phase(), phi in 0.0f64..FRAC_PI_4) {
        let f = backaction_functional(&p, phi).unwrap();
        let (lo, hi) = f.eigenvalues();
        prop_assert!(lo >= -1e-10 * hi.abs().max(1.0), "{lo} {hi}");
    }

    #[test]
    fn first_order_correction_solves_its_equation(p in normal_phase(), phi in 0.0f64..FRAC_PI_4) {
        let r = rotation(squeezing_angle(&p));
        let a_bar = r * drift_matrix(&p) * r.transpose();
        let forcing = backaction_functional(&p, phi).unwrap().to_matrix() * p.kappa();
        let x = first_order_correction(&p, phi).unwrap().to_matrix();
        let residual = a_bar * x + x * a_bar.transpose() - forcing;
        prop_assert!(residual.norm() < 1e-10 * forcing.norm().max(1.0) * x.norm().max(1.0));
        let oracle = lyapunov(&a_bar, &(-forcing));
        prop_assert!((x - oracle).norm() < 1e-8 * oracle.norm().max(1.0));
    }
}

#[test]
fn detector_matrix_is_continuous_at_homodyne() {
    let b0 = measurement_matrix_b(&MeasurementParams::new(0.0, 0.4, 1.0).unwrap());
    let mut prev = f64::INFINITY;
    for s in [1e-2, 1e-4, 1e-6] {
        let d = (measurement_matrix_b(&MeasurementParams::new(s, 0.4, 1.0).unwrap()) - b0).norm();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 2e-3);
}

#[test]
fn detector_matrix_limits() {
    let het = measurement_matrix_b(&MeasurementParams::heterodyne(0.5).unwrap());
    let h = 1.0 / 2f64.sqrt();
    assert!((het.xx - h).abs() < 1e-15 && het.xp.abs() < 1e-15 && (het.pp - h).abs() < 1e-15);
    let hom = measurement_matrix_b(&MeasurementParams::homodyne(0.0, 1.0).unwrap());
    assert_eq!((hom.xx, hom.xp, hom.pp), (1.0, 0.0, 0.0));
}

#[test]
fn becp_reference_points() {
    let (w, e) = becp_from_angle(0.6, 1.0).unwrap();
    assert!((w - 0.1944).abs() < 5e-5 && (e - 0.5365).abs() < 5e-5, "{w} {e}");
    let (w, e) = becp_from_angle(std::f64::consts::FRAC_PI_8, 1.0).unwrap();
    assert!((w - 0.5).abs() < 1e-12 && (e - 0.5f64.sqrt()).abs() < 1e-12);
    let (w, _) = becp_from_angle(0.05, 1.0).unwrap();
    assert!((w - 4.983).abs() < 5e-4, "{w}");
    assert_eq!(becp_from_angle(FRAC_PI_4, 1.0), Err(Error::AngleOutOfRange(FRAC_PI_4)));
}

#[test]
fn outside_phase_is_rejected() {
    let p = SystemParams::new(0.2, 0.6, 1.0).unwrap();
    assert!(matches!(unconditional_steady_covariance(&p), Err(Error::OutsidePhase { .. })));
    let e = unconditional_steady_covariance(&p).unwrap_err().to_string();
    assert!(e.contains("outside the normal phase"));
}
