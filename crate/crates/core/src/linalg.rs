//! Small dense linear algebra on 2×2 matrices.
//!
//! Everything in this crate lives in a two-dimensional phase space, so the
//! general machinery is reduced to closed forms and tiny LU solves.

use serde::{Deserialize, Serialize};

pub use nalgebra::{Matrix2, Vector2};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

/// Symmetric 2×2 matrix stored as its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix2 {
    pub xx: f64,
    pub xp: f64,
    pub pp: f64,
}

impl SymMatrix2 {
    pub const fn new(xx: f64, xp: f64, pp: f64) -> Self {
        Self { xx, xp, pp }
    }

    pub const fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0)
    }

    pub const fn zeros() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub const fn diagonal(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, b)
    }

    /// Symmetric part of an arbitrary matrix.
    pub fn from_matrix(m: &Matrix2<f64>) -> Self {
        Self::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
    }

    pub fn to_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.xx, self.xp, self.xp, self.pp)
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.pp
    }

    pub fn det(&self) -> f64 {
        self.xx * self.pp - self.xp * self.xp
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xp * self.xp + self.pp * self.pp).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.xx.abs().max(self.xp.abs()).max(self.pp.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.xx.is_finite() && self.xp.is_finite() && self.pp.is_finite()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.xx + self.pp);
        let half_diff = 0.5 * (self.xx - self.pp);
        let r = half_diff.hypot(self.xp);
        (mean - r, mean + r)
    }

    /// Positive semidefinite up to an absolute tolerance on the smallest eigenvalue.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.eigenvalues().0 >= -tol
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(c * self.xx, c * self.xp, c * self.pp)
    }

    /// `R(θ) S R(θ)ᵀ` with [`rotation`].
    pub fn rotated(&self, theta: f64) -> Self {
        let r = rotation(theta);
        Self::from_matrix(&(r * self.to_matrix() * r.transpose()))
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.xx, self.xp, self.pp]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl std::ops::Add for SymMatrix2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.xx + o.xx, self.xp + o.xp, self.pp + o.pp)
    }
}

impl std::ops::Sub for SymMatrix2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.xx - o.xx, self.xp - o.xp, self.pp - o.pp)
    }
}

impl std::ops::Mul<f64> for SymMatrix2 {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        self.scale(c)
    }
}

impl From<SymMatrix2> for Matrix2<f64> {
    fn from(s: SymMatrix2) -> Self {
        s.to_matrix()
    }
}

/// Passive rotation `R(θ) = [[cos θ, sin θ], [−sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Solves `P X + X Qᵀ = C` for a general 2×2 `X`.
///
/// Returns `None` when some pair of eigenvalues satisfies `λ_P + λ_Q ≈ 0`.
pub fn solve_sylvester(p: &Matrix2<f64>, q: &Matrix2<f64>, c: &Matrix2<f64>) -> Option<Matrix2<f64>> {
    // Column-major vec: (I ⊗ P + Q ⊗ I) vec X = vec C.
    let mut k = Matrix4::<f64>::zeros();
    for col in 0..2 {
        for row in 0..2 {
            let i = 2 * col + row;
            for r2 in 0..2 {
                k[(i, 2 * col + r2)] += p[(row, r2)];
            }
            for c2 in 0..2 {
                k[(i, 2 * c2 + row)] += q[(col, c2)];
            }
        }
    }
    let scale = k.abs().max().max(f64::MIN_POSITIVE);
    let lu = k.lu();
    if lu.determinant().abs() <= 1e-13 * scale.powi(4) {
        return None;
    }
    let rhs = Vector4::new(c[(0, 0)], c[(1, 0)], c[(0, 1)], c[(1, 1)]);
    let x = lu.solve(&rhs)?;
    let out = Matrix2::new(x[0], x[2], x[1], x[3]);
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Solves the symmetric Lyapunov equation `A X + X Aᵀ = C`.
pub fn solve_lyapunov(a: &Matrix2<f64>, c: &SymMatrix2) -> Option<SymMatrix2> {
    let (a11, a12, a21, a22) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let k = Matrix3::new(2.0 * a11, 2.0 * a12, 0.0, a21, a11 + a22, a12, 0.0, 2.0 * a21, 2.0 * a22);
    let scale = k.abs().max().max(f64::MIN_POSITIVE);
    let lu = k.lu();
    if lu.determinant().abs() <= 1e-13 * scale.powi(3) {
        return None;
    }
    let x = lu.solve(&Vector3::new(c.xx, c.xp, c.pp))?;
    let out = SymMatrix2::new(x[0], x[1], x[2]);
    out.is_finite().then_some(out)
}

/// Eigenvalues of a general real 2×2 matrix as `(re, im)` pairs.
pub fn eigenvalues2(m: &Matrix2<f64>) -> [(f64, f64); 2] {
    let tr = m.trace();
    let det = m.determinant();
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [(0.5 * tr - s, 0.0), (0.5 * tr + s, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [(0.5 * tr, -s), (0.5 * tr, s)]
    }
}

/// Largest real part among the eigenvalues.
pub fn spectral_abscissa(m: &Matrix2<f64>) -> f64 {
    let [a, b] = eigenvalues2(m);
    a.0.max(b.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Matrix2<f64>, b: &Matrix2<f64>, tol: f64) -> bool {
        (a - b).abs().max() < tol
    }

    #[test]
    fn sylvester_residual_vanishes() {
        let p = Matrix2::new(-0.5, 0.3, -0.7, -0.4);
        let q = Matrix2::new(-1.1, 0.2, 0.05, -0.6);
        let c = Matrix2::new(1.0, -2.0, 0.5, 3.0);
        let x = solve_sylvester(&p, &q, &c).unwrap();
        assert!(close(&(p * x + x * q.transpose()), &c, 1e-12));
    }

    #[test]
    fn sylvester_detects_singularity() {
        let p = Matrix2::new(1.0, 0.0, 0.0, -2.0);
        let q = Matrix2::new(-1.0, 0.0, 0.0, 3.0);
        assert!(solve_sylvester(&p, &q, &Matrix2::identity()).is_none());
    }

    #[test]
    fn lyapunov_matches_general_solver() {
        let a = Matrix2::new(-0.5, -0.3, -0.7, -0.5);
        let c = SymMatrix2::new(-1.0, 0.2, -1.0);
        let x = solve_lyapunov(&a, &c).unwrap();
        let g = solve_sylvester(&a, &a, &c.to_matrix()).unwrap();
        assert!(close(&x.to_matrix(), &g, 1e-12));
    }

    #[test]
    fn rotation_preserves_trace_and_det() {
        let s = SymMatrix2::new(4.75, -6.25, 9.75);
        let r = s.rotated(0.37);
        assert!((r.trace() - s.trace()).abs() < 1e-12);
        assert!((r.det() - s.det()).abs() < 1e-10);
    }

    #[test]
    fn eigenvalues_of_symmetric() {
        let (lo, hi) = SymMatrix2::new(2.0, 1.0, 2.0).eigenvalues();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
    }
}
