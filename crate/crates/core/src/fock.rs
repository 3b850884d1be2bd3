//! Truncated Fock-space reference solvers.
//!
//! These are brute-force checks for the Gaussian machinery: the unmonitored
//! Lindblad equation and the two-frequency generalized master equation
//!
//! ```text
//! dμ/dt = −i (H_{ω₁} μ − μ H_{ω₂}) + κ D[a] μ
//! ```
//!
//! whose trace gives the fidelity `F(ω₁, ω₂) = |Tr μ|` of the joint
//! oscillator and environment state. Operators are dense, but the right-hand
//! side exploits the banded structure of `a`, `a†a` and `a², a†²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::{window_fit, LinearFit};
use crate::model::SystemParams;
use crate::ode::step_count;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Dense square operator on the first `dim` Fock states, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: usize,
    entries: Vec<Complex64>,
}

impl FockOperator {
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("Fock dimension must be at least 2, got {dim}")));
        }
        Ok(Self { dim, entries: vec![ZERO; dim * dim] })
    }

    /// `|0⟩⟨0|`
    pub fn vacuum(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        m.entries[0] = Complex64::new(1.0, 0.0);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|O_ij − conj(O_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `|O_{N−1,N−1}| + |O_{N−2,N−2}|`, the weight in the two highest levels.
    pub fn tail_weight(&self) -> f64 {
        let n = self.dim;
        self.get(n - 1, n - 1).norm() + self.get(n - 2, n - 2).norm()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim;
        let h = nalgebra::DMatrix::<Complex64>::from_fn(n, n, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()));
        h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `Tr(a†a O)`
    pub fn number(&self) -> Complex64 {
        (0..self.dim).map(|k| k as f64 * self.get(k, k)).sum()
    }

    /// `Tr(a² O)`
    pub fn a2(&self) -> Complex64 {
        (0..self.dim - 2).map(|m| pair(m) * self.get(m + 2, m)).sum()
    }

    /// `Tr(a†² O)`
    pub fn adag2(&self) -> Complex64 {
        (0..self.dim - 2).map(|m| pair(m) * self.get(m, m + 2)).sum()
    }

    /// `Tr((a†a)² O)`
    pub fn number_squared(&self) -> Complex64 {
        (0..self.dim).map(|k| (k * k) as f64 * self.get(k, k)).sum()
    }

    /// `Tr(a†³ a O)`
    pub fn adag3_a(&self) -> Complex64 {
        (0..self.dim - 2).map(|k| k as f64 * pair(k) * self.get(k, k + 2)).sum()
    }

    /// `Tr(a† a³ O)`
    pub fn adag_a3(&self) -> Complex64 {
        (0..self.dim - 2).map(|m| m as f64 * pair(m) * self.get(m + 2, m)).sum()
    }
}

/// `sqrt((m+1)(m+2))`, the matrix element `⟨m|a²|m+2⟩`.
fn pair(m: usize) -> f64 {
    (((m + 1) * (m + 2)) as f64).sqrt()
}

/// Right-hand side of the generalized master equation on a fixed truncation.
struct Generator {
    dim: usize,
    kappa: f64,
    omega1: f64,
    omega2: f64,
    half_eps: f64,
    sqrt: Vec<f64>,
    pairs: Vec<f64>,
}

impl Generator {
    fn new(dim: usize, omega1: f64, omega2: f64, epsilon: f64, kappa: f64) -> Self {
        Self {
            dim,
            kappa,
            omega1,
            omega2,
            half_eps: 0.5 * epsilon,
            sqrt: (0..=dim).map(|k| (k as f64).sqrt()).collect(),
            pairs: (0..dim).map(pair).collect(),
        }
    }

    fn apply(&self, mu: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        let mi = Complex64::new(0.0, -1.0);
        for i in 0..n {
            for j in 0..n {
                let at = |r: usize, c: usize| mu[r * n + c];
                let m = at(i, j);
                // H₁ μ: diagonal, a² (i → i+2) and a†² (i → i−2) bands.
                let mut h1 = self.omega1 * i as f64 * m;
                if i + 2 < n {
                    h1 += self.half_eps * self.pairs[i] * at(i + 2, j);
                }
                if i >= 2 {
                    h1 += self.half_eps * self.pairs[i - 2] * at(i - 2, j);
                }
                // μ H₂
                let mut h2 = self.omega2 * j as f64 * m;
                if j >= 2 {
                    h2 += self.half_eps * self.pairs[j - 2] * at(i, j - 2);
                }
                if j + 2 < n {
                    h2 += self.half_eps * self.pairs[j] * at(i, j + 2);
                }
                let mut v = mi * (h1 - h2) - 0.5 * self.kappa * (i + j) as f64 * m;
                if i + 1 < n && j + 1 < n {
                    v += self.kappa * self.sqrt[i + 1] * self.sqrt[j + 1] * at(i + 1, j + 1);
                }
                out[i * n + j] = v;
            }
        }
    }
}

struct Rk4Buffers {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
}

impl Rk4Buffers {
    fn new(len: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![ZERO; len]), tmp: vec![ZERO; len] }
    }

    fn step(&mut self, g: &Generator, y: &mut [Complex64], h: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        g.apply(y, k1);
        for (t, (a, b)) in self.tmp.iter_mut().zip(y.iter().zip(k1.iter())) {
            *t = a + 0.5 * h * b;
        }
        g.apply(&self.tmp, k2);
        for (t, (a, b)) in self.tmp.iter_mut().zip(y.iter().zip(k2.iter())) {
            *t = a + 0.5 * h * b;
        }
        g.apply(&self.tmp, k3);
        for (t, (a, b)) in self.tmp.iter_mut().zip(y.iter().zip(k3.iter())) {
            *t = a + h * b;
        }
        g.apply(&self.tmp, k4);
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Truncation and step settings for the Fock solvers.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FockOptions {
    pub dim: usize,
    pub dt: f64,
    /// Largest tolerated weight in the two highest levels.
    pub tail_tol: f64,
}

impl Default for FockOptions {
    fn default() -> Self {
        Self { dim: 60, dt: 1e-2, tail_tol: 1e-8 }
    }
}

fn evolve<F: FnMut(usize, f64, &FockOperator) -> Result<()>>(
    g: &Generator,
    mut state: FockOperator,
    t_end: f64,
    opts: &FockOptions,
    record_every: usize,
    mut record: F,
) -> Result<FockOperator> {
    if !(opts.dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParameter("need dt > 0 and t_end >= 0".into()));
    }
    let n = step_count(t_end, opts.dt);
    let h = if n == 0 { opts.dt } else { t_end / n as f64 };
    let mut buf = Rk4Buffers::new(state.entries.len());
    let check = |s: &FockOperator| {
        let tail = s.tail_weight();
        if tail > opts.tail_tol || !tail.is_finite() {
            Err(Error::TruncationError { dim: s.dim, tail })
        } else {
            Ok(())
        }
    };
    record(0, 0.0, &state)?;
    for k in 1..=n {
        buf.step(g, &mut state.entries, h);
        if k % record_every.max(1) == 0 || k == n {
            check(&state)?;
            record(k, k as f64 * h, &state)?;
        }
    }
    Ok(state)
}

/// `(t, ρ(t))` samples from [`lindblad_evolve`].
pub type FockSeries = Vec<(f64, FockOperator)>;

/// Unmonitored Lindblad evolution of `rho0`, sampled every `record_every` steps.
pub fn lindblad_evolve(p: &SystemParams, rho0: FockOperator, t_end: f64, opts: &FockOptions, record_every: usize) -> Result<FockSeries> {
    let g = Generator::new(rho0.dim, p.omega(), p.omega(), p.epsilon(), p.kappa());
    let mut out = Vec::new();
    evolve(&g, rho0, t_end, opts, record_every, |_, t, s| {
        out.push((t, s.clone()));
        Ok(())
    })?;
    Ok(out)
}

/// `|Tr μ(t)|` for the generalized master equation started from vacuum.
#[derive(Debug, Clone, Serialize)]
pub struct FidelitySeries {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
}

pub fn generalized_me_fidelity(
    p: &SystemParams,
    omega1: f64,
    omega2: f64,
    t_end: f64,
    opts: &FockOptions,
    record_every: usize,
) -> Result<FidelitySeries> {
    for w in [omega1, omega2] {
        p.with_omega(w)?.require_normal_phase()?;
    }
    let g = Generator::new(opts.dim, omega1, omega2, p.epsilon(), p.kappa());
    let (mut times, mut fidelity) = (Vec::new(), Vec::new());
    evolve(&g, FockOperator::vacuum(opts.dim)?, t_end, opts, record_every, |_, t, s| {
        times.push(t);
        fidelity.push(s.trace().norm());
        Ok(())
    })?;
    Ok(FidelitySeries { times, fidelity })
}

/// Fidelity-based `I_G(t)` with its step-refinement diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteDifferenceQfi {
    pub times: Vec<f64>,
    /// Stencil with step `h`.
    pub coarse: Vec<f64>,
    /// Stencil with step `h/2`.
    pub fine: Vec<f64>,
    /// `(4·fine − coarse)/3`, cancelling the leading `O(h²)` error.
    pub extrapolated: Vec<f64>,
    pub coarse_fit: LinearFit,
    pub fine_fit: LinearFit,
    pub fit: LinearFit,
    pub fit_window: (f64, f64),
}

fn stencil(p: &SystemParams, h: f64, t_end: f64, opts: &FockOptions, record_every: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let w = p.omega();
    // On the diagonal ω₁ = ω₂ the evolution is trace preserving, so ln F = 0
    // there, and F(ω₁, ω₂) = F(ω₂, ω₁) by conjugation symmetry.
    let off = generalized_me_fidelity(p, w + h, w - h, t_end, opts, record_every)?;
    let ig = off.fidelity.iter().map(|f| 4.0 * (-2.0 * f.ln()) / (4.0 * h * h)).collect();
    Ok((off.times, ig))
}

/// `I_G(t) = 4 ∂ω₁∂ω₂ ln F` from the four-point central stencil at steps `h`
/// and `h/2`, Richardson-combined. The slope is fitted over the final 40%.
///
/// Fails with [`Error::StencilUnstable`] if the two step sizes give late-time
/// slopes differing by more than 1%.
pub fn qfi_finite_difference(p: &SystemParams, h: f64, t_end: f64, opts: &FockOptions, record_every: usize) -> Result<FiniteDifferenceQfi> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("stencil step must be positive, got {h}")));
    }
    let (times, coarse) = stencil(p, h, t_end, opts, record_every)?;
    let (_, fine) = stencil(p, 0.5 * h, t_end, opts, record_every)?;
    let extrapolated: Vec<f64> = coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    let fit_window = (0.6 * t_end, t_end);
    let fit_of = |v: &[f64]| window_fit(&times, v, fit_window.0, fit_window.1);
    let (coarse_fit, fine_fit, fit) = (fit_of(&coarse), fit_of(&fine), fit_of(&extrapolated));
    let rel_change = (coarse_fit.slope - fine_fit.slope).abs() / fine_fit.slope.abs();
    if rel_change > 1e-2 || !rel_change.is_finite() {
        return Err(Error::StencilUnstable { rel_change });
    }
    Ok(FiniteDifferenceQfi { times, coarse, fine, extrapolated, coarse_fit, fine_fit, fit, fit_window })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_is_stationary_without_drive() {
        let p = SystemParams::unit(0.4, 0.0).unwrap();
        let s = lindblad_evolve(&p, FockOperator::vacuum(6).unwrap(), 2.0, &FockOptions::default(), 50).unwrap();
        let last = &s.last().unwrap().1;
        assert_eq!(last, &FockOperator::vacuum(6).unwrap());
    }

    #[test]
    fn equal_frequencies_preserve_trace() {
        let p = SystemParams::unit(0.3, 0.4).unwrap();
        let opts = FockOptions { dim: 30, ..Default::default() };
        let f = generalized_me_fidelity(&p, 0.3, 0.3, 3.0, &opts, 50).unwrap();
        assert!(f.fidelity.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn fidelity_is_symmetric() {
        let p = SystemParams::unit(0.3, 0.4).unwrap();
        let opts = FockOptions { dim: 30, ..Default::default() };
        let a = generalized_me_fidelity(&p, 0.31, 0.29, 3.0, &opts, 50).unwrap();
        let b = generalized_me_fidelity(&p, 0.29, 0.31, 3.0, &opts, 50).unwrap();
        for (x, y) in a.fidelity.iter().zip(&b.fidelity) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn small_truncation_is_detected() {
        let p = SystemParams::near_boundary(0.2, 0.03, 1.0).unwrap();
        let opts = FockOptions { dim: 8, ..Default::default() };
        let e = lindblad_evolve(&p, FockOperator::vacuum(8).unwrap(), 10.0, &opts, 100).unwrap_err();
        assert!(matches!(e, Error::TruncationError { dim: 8, .. }));
    }

    #[test]
    fn operator_moments_of_number_state() {
        let mut m = FockOperator::zeros(5).unwrap();
        m.set(2, 2, Complex64::new(1.0, 0.0));
        assert_eq!(m.number(), Complex64::new(2.0, 0.0));
        assert_eq!(m.number_squared(), Complex64::new(4.0, 0.0));
        assert_eq!(m.a2(), ZERO);
        assert!(FockOperator::zeros(1).is_err());
    }
}
