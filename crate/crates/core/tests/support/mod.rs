//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the library's solvers: each routine rebuilds its
//! quantity from the defining linear equations or ODEs.

#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector3, Vector4};
use num_complex::Complex64;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Drift of the quadrature means in the rotating frame.
pub fn drift(omega: f64, epsilon: f64, kappa: f64) -> Matrix2<f64> {
    Matrix2::new(-kappa / 2.0, omega - epsilon, -omega - epsilon, -kappa / 2.0)
}

/// Solves `A X + X Aᵀ = −C` by vectorisation (column-major Kronecker form).
pub fn lyapunov(a: &Matrix2<f64>, c: &Matrix2<f64>) -> Matrix2<f64> {
    let id = Matrix2::<f64>::identity();
    let k: Matrix4<f64> = id.kronecker(a) + a.kronecker(&id);
    let rhs = Vector4::new(-c[(0, 0)], -c[(1, 0)], -c[(0, 1)], -c[(1, 1)]);
    let x = k.lu().solve(&rhs).expect("Hurwitz drift");
    Matrix2::new(x[0], x[2], x[1], x[3])
}

/// Unconditional steady covariance from the Lyapunov equation with `D = κI`.
pub fn unconditional(omega: f64, epsilon: f64, kappa: f64) -> Matrix2<f64> {
    lyapunov(&drift(omega, epsilon, kappa), &(Matrix2::identity() * kappa))
}

fn solve3(m: &Matrix3<Complex64>, b: &Vector3<Complex64>) -> Vector3<Complex64> {
    m.lu().solve(b).expect("non-singular moment generator")
}

/// Asymptotic growth rate of the global QFI from the exact linear moment
/// hierarchy of the Gaussian (Kerr-free) oscillator.
///
/// Second moments `X = (n, ⟨a²⟩, ⟨a†²⟩)` obey `Ẋ = L X + c`. The first
/// frequency derivative of the trace grows as `2i(n_ss t + N₀)` with
/// `N₀ = [L⁻¹ X_ss]₀`. The second-derivative block obeys `v̇ = M v + 2i f(t)`
/// whose source is affine in time at late times, so `v ≈ p t + q` and the
/// doubly integrated trace gives the slope below.
pub fn exact_k_g(omega: f64, epsilon: f64, kappa: f64) -> f64 {
    let (w, e, k) = (omega, epsilon, kappa);
    let l = Matrix3::new(cx(-k), I * e, -I * e, -2.0 * I * e, -2.0 * I * w - k, cx(0.0), 2.0 * I * e, cx(0.0), 2.0 * I * w - k);
    let c = Vector3::new(cx(0.0), -I * e, I * e);
    let xss = -solve3(&l, &c);
    let (n, a2, a2c) = (xss[0].re, xss[1], xss[2]);
    let n0 = solve3(&l, &xss)[0].re;
    let m = Matrix3::new(cx(-k), cx(0.0), -I * e, cx(0.0), cx(-k), 2.0 * I * w, 4.0 * I * e, 2.0 * I * w, cx(-k));
    let f1 = cx(2.0 * n * n + n + a2.norm_sqr());
    let f2 = 3.0 * n * a2c + 3.0 * n * a2 + a2c + a2;
    let f3 = 3.0 * n * a2c - 3.0 * n * a2 + a2c - a2;
    let f_ss = Vector3::new(f1, f2, f3 + e * 2.0 * I * n0);
    let g = Vector3::new(cx(0.0), cx(0.0), e * 2.0 * I * n);
    let p = solve3(&m, &(g * (-2.0 * I)));
    let q = solve3(&m, &(p - f_ss * (2.0 * I)));
    4.0 * q[0].im - 8.0 * n0 * n + 4.0 * p[0].im - 8.0 * n * n
}

/// `I_G(t)` by direct RK4 integration of the complex moment hierarchy,
/// sampled at `t_end·j/samples`.
pub fn qfi_moment_ode(omega: f64, epsilon: f64, kappa: f64, t_end: f64, samples: usize, substeps: usize) -> Vec<(f64, f64)> {
    let (w, e, k) = (omega, epsilon, kappa);
    let rhs = |y: &[Complex64; 7]| -> [Complex64; 7] {
        let [n, a2, n1, v1, v2, v3, _] = *y;
        let ad2 = a2.conj();
        let nr = n.re;
        let f1 = cx(2.0 * nr * nr + nr + a2.norm_sqr());
        let f2 = 3.0 * nr * ad2 + 3.0 * nr * a2 + ad2 + a2;
        let f3 = 3.0 * nr * ad2 - 3.0 * nr * a2 + ad2 - a2 + e * n1;
        [
            I * e * (a2 - ad2) - k * n,
            -2.0 * I * w * a2 - I * e * (2.0 * n + 1.0) - k * a2,
            2.0 * I * n,
            -k * v1 - I * e * v3 + 2.0 * I * f1,
            -k * v2 + 2.0 * I * w * v3 + 2.0 * I * f2,
            4.0 * I * e * v1 + 2.0 * I * w * v2 - k * v3 + 2.0 * I * f3,
            4.0 * I * v1,
        ]
    };
    let h = t_end / (samples * substeps) as f64;
    let mut y = [cx(0.0); 7];
    let ig = |y: &[Complex64; 7]| -(y[6] - y[2] * y[2]).re;
    let mut out = vec![(0.0, ig(&y))];
    let axpy = |y: &[Complex64; 7], k: &[Complex64; 7], s: f64| {
        let mut o = *y;
        for i in 0..7 {
            o[i] += k[i] * s;
        }
        o
    };
    for j in 1..=samples {
        for _ in 0..substeps {
            let k1 = rhs(&y);
            let k2 = rhs(&axpy(&y, &k1, h / 2.0));
            let k3 = rhs(&axpy(&y, &k2, h / 2.0));
            let k4 = rhs(&axpy(&y, &k3, h));
            for i in 0..7 {
                y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
            }
        }
        out.push((t_end * j as f64 / samples as f64, ig(&y)));
    }
    out
}

/// Least-squares slope of `(t, v)` pairs with `t ≥ from`.
pub fn slope_after(points: &[(f64, f64)], from: f64) -> f64 {
    let pts: Vec<_> = points.iter().filter(|(t, _)| *t >= from).collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
    sxy / sxx
}

/// Normal-phase amplitude at fractional distance `u ∈ (0, 1)` below the
/// critical drive.
pub fn epsilon_below(omega: f64, kappa: f64, u: f64) -> f64 {
    u * (omega * omega + kappa * kappa / 4.0).sqrt()
}
