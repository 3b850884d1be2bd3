//! Global quantum Fisher information `I_G` of the joint oscillator and
//! environment state, and its linear growth rate `k_G`.
//!
//! Writing `μ` for the two-frequency operator evolved from the vacuum,
//! `I_G = −Re(Tr[∂²μ] − (Tr[∂μ])²)` where derivatives are taken with respect
//! to the frequency half-difference. `Tr[∂μ] = 2i ∫ ⟨a†a⟩`, and `Tr[∂²μ]`
//! follows from a three-component linear system driven by fourth moments of
//! the unmonitored state, which for the vacuum-evolved Gaussian state reduce
//! to products of `⟨a†a⟩` and `⟨a²⟩`.
//!
//! All spectral quantities are complex so the oscillatory (`ε < ω`) and
//! overdamped (`ε > ω`) regimes share one code path.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::{window_fit, LinearFit};
use crate::model::SystemParams;
use crate::quadrature::integrate_vec;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Minimum `|ε − ω|` (in units of κ) at which the two Langevin rates are
/// treated as distinct.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Constants of the Heisenberg–Langevin solution
/// `a(t) = c₁(t) a(0) + c₂(t) a†(0) + noise`, with
/// `c₁ = α e^{−λ₋t} + β e^{−λ₊t}` and `c₂ = γ (e^{−λ₋t} − e^{−λ₊t})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LangevinCoefficients {
    pub lambda_minus: Complex64,
    pub lambda_plus: Complex64,
    pub alpha_c: Complex64,
    pub beta_c: Complex64,
    pub gamma_c: Complex64,
    /// Principal square root of `ε² − ω²`.
    pub root: Complex64,
    pub omega: f64,
    pub epsilon: f64,
    pub kappa: f64,
}

impl LangevinCoefficients {
    pub fn new(p: &SystemParams) -> Result<Self> {
        let (w, e, k) = (p.omega(), p.epsilon(), p.kappa());
        let gap = (e - w).abs();
        if gap < DEGENERACY_GAP * k {
            return Err(Error::DegenerateSpectrum { gap });
        }
        let root = c(e * e - w * w).sqrt();
        Ok(Self {
            lambda_minus: 0.5 * k - root,
            lambda_plus: 0.5 * k + root,
            alpha_c: 0.5 - I * w / (2.0 * root),
            beta_c: 0.5 + I * w / (2.0 * root),
            gamma_c: -I * e / (2.0 * root),
            root,
            omega: w,
            epsilon: e,
            kappa: k,
        })
    }

    /// Time-dependent building blocks of the second moments.
    fn kernels(&self, t: f64) -> Kernels {
        let (lm, lp) = (self.lambda_minus, self.lambda_plus);
        let (rm, rp) = (2.0 * lm.re, 2.0 * lp.re);
        let z = lm + lp.conj();
        let sum = lm + lp;
        let decay = |r: Complex64| (-r * t).exp();
        // (1 − e^{−rt}) / r and (rt − 1 + e^{−rt}) / r²
        let once = |r: Complex64| (1.0 - decay(r)) / r;
        let twice = |r: Complex64| (r * t - 1.0 + decay(r)) / (r * r);
        let (al, be) = (self.alpha_c, self.beta_c);
        let p = (decay(c(rm)) + decay(c(rp)) - 2.0 * decay(z).re).re;
        let q = (once(c(rm)) + once(c(rp)) - 2.0 * once(z).re).re;
        let x = al * decay(2.0 * lm) - be * decay(2.0 * lp) - (al - be) * decay(sum);
        let y = al * once(2.0 * lm) - be * once(2.0 * lp) - (al - be) * once(sum);
        let int_p = q;
        let int_q = (twice(c(rm)) + twice(c(rp)) - 2.0 * twice(z).re).re;
        Kernels { p, q, x, y, int_p, int_q }
    }

    fn occupation_parts(&self, t: f64) -> (f64, Complex64, f64) {
        let g2 = self.gamma_c.norm_sqr();
        let k = self.kappa;
        let kr = self.kernels(t);
        (g2 * (kr.p + k * kr.q), self.gamma_c * (kr.x + k * kr.y), g2 * (kr.int_p + k * kr.int_q))
    }
}

struct Kernels {
    p: f64,
    q: f64,
    x: Complex64,
    y: Complex64,
    int_p: f64,
    int_q: f64,
}

/// `(⟨a†a⟩(t), ⟨a²⟩(t))` of the unmonitored oscillator started in vacuum.
pub fn langevin_moments(p: &SystemParams, t: f64) -> Result<(f64, Complex64)> {
    let lc = LangevinCoefficients::new(p)?;
    let (n, a2, _) = lc.occupation_parts(t);
    Ok((n, a2))
}

/// `∫₀ᵗ ⟨a†a⟩ dτ` in closed form.
pub fn integrated_occupation(p: &SystemParams, t: f64) -> Result<f64> {
    Ok(LangevinCoefficients::new(p)?.occupation_parts(t).2)
}

/// Fourth moments of a zero-mean Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourthMoments {
    /// `⟨(a†a)²⟩`
    pub number_squared: Complex64,
    /// `⟨a†³ a⟩`
    pub adag3_a: Complex64,
    /// `⟨a† a³⟩`
    pub adag_a3: Complex64,
}

/// Wick factorisation for zero first moments.
pub fn wick_fourth_moments(n: f64, a2: Complex64, adag2: Complex64) -> FourthMoments {
    FourthMoments { number_squared: c(2.0 * n * n + n) + adag2 * a2, adag3_a: 3.0 * n * adag2, adag_a3: 3.0 * n * a2 }
}

/// Source vector `f(t)` of the second-derivative moment system.
pub fn source_vector(lc: &LangevinCoefficients, t: f64) -> [Complex64; 3] {
    let (n, a2, int_n) = lc.occupation_parts(t);
    let ad2 = a2.conj();
    let w = wick_fourth_moments(n, a2, ad2);
    let first = 2.0 * I * int_n;
    [w.number_squared, w.adag3_a + w.adag_a3 + ad2 + a2, w.adag3_a - w.adag_a3 + ad2 - a2 + lc.epsilon * first]
}

/// `Tr[∂μ](t) = 2i ∫₀ᵗ ⟨a†a⟩`.
pub fn trace_first_derivative(p: &SystemParams, t: f64) -> Result<Complex64> {
    Ok(2.0 * I * integrated_occupation(p, t)?)
}

/// Analytic growth rate with its intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KgComponents {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub lambda3: Complex64,
    pub k_g1: Complex64,
    pub k_g2: Complex64,
    pub k_g3: Complex64,
    pub k_g4: Complex64,
    /// Alternative first component, three terms of which are absent from
    /// `k_g1`; kept for comparison only.
    pub printed_k_g1: Complex64,
    pub k_g: f64,
    /// `|Im(−k_g1 − k_g2 − k_g3 + k_g4)|`; zero up to rounding.
    pub imag_residue: f64,
}

/// Closed-form long-time growth rate `k_G`.
///
/// Evaluated in units where κ = 1 and rescaled by `1/κ` at the end, since
/// `k_G` has dimensions of time.
pub fn qfi_rate_analytic(p: &SystemParams) -> Result<KgComponents> {
    let de = p.delta_epsilon();
    if de < 0.0 {
        return Err(Error::OutsidePhase { epsilon: p.epsilon(), epsilon_c: p.epsilon_c() });
    }
    if de <= 1e-12 * p.kappa() {
        return Err(Error::OnBoundary);
    }
    let scale = p.kappa();
    let unit = SystemParams::unit(p.omega() / scale, p.epsilon() / scale)?;
    let lc = LangevinCoefficients::new(&unit)?;
    let (w, e, k) = (lc.omega, lc.epsilon, 1.0);
    let (lm, lp) = (lc.lambda_minus, lc.lambda_plus);
    let (al, be, ga) = (lc.alpha_c, lc.beta_c, lc.gamma_c);
    let sq = lc.root;
    let g2 = ga.norm_sqr();

    let l1 = c(1.0 / (2.0 * lm.re) + 1.0 / (2.0 * lp.re)) - 1.0 / (lm + lp.conj()) - 1.0 / (lm.conj() + lp);
    let l2 = al / (2.0 * lm) - be / (2.0 * lp) - (al - be) / (lm + lp);
    let l3 = c(1.0 / (4.0 * lm.re * lm.re) + 1.0 / (4.0 * lp.re * lp.re))
        - 1.0 / ((lm + lp.conj()) * (lm + lp.conj()))
        - 1.0 / ((lm.conj() + lp) * (lm.conj() + lp));

    let d = e * e - w * w;
    let kp = k + 2.0 * sq;
    let km = k - 2.0 * sq;
    let pref = 4.0 * g2 / d;
    let line1 = pref * (4.0 * w * w * k - 2.0 * e * e * k * k / kp - 2.0 * e * e * k * k / km) * l1 * l1;
    let line2 = pref * (2.0 * w * w - e * e * k / kp - e * e * k / km) * l1;
    let line3 = pref * (2.0 * w * w * k - e * e * k * k / kp - e * e * k * k / km) * l2.norm_sqr();
    let printed_k_g1 = line1 + line2 + line3;
    let k_g1 = 3.0 * line3;

    let gl2 = ga * l2;
    let k_g2 = 4.0 * w * e * k * g2 / d * (6.0 - 3.0 * k / kp - 3.0 * k / km) * l1 * gl2.re
        + 4.0 * w * e * k / d * (2.0 - k / kp - k / km) * gl2.re;

    let diff = 1.0 / kp - 1.0 / km;
    let diff2 = 1.0 / (kp * kp) - 1.0 / (km * km);
    let k_g3 = -12.0 * e * k * k * g2 / sq * diff * l1 * gl2.im - 4.0 * e * k / sq * diff * gl2.im
        + 4.0 * e * e * g2 / sq * diff * (l1 - k * l3)
        - 4.0 * e * e * k * g2 / sq * diff2 * l1;
    let k_g4 = -8.0 * k * g2 * g2 * (l1 - k * l3) * l1;

    let total = -k_g1 - k_g2 - k_g3 + k_g4;
    Ok(KgComponents {
        lambda1: l1,
        lambda2: l2,
        lambda3: l3,
        k_g1,
        k_g2,
        k_g3,
        k_g4,
        printed_k_g1,
        k_g: total.re / scale,
        imag_residue: total.im.abs() / scale,
    })
}

/// `I_G` on a uniform time grid.
#[derive(Debug, Clone, Serialize)]
pub struct QfiSeries {
    pub times: Vec<f64>,
    pub i_g: Vec<f64>,
}

impl QfiSeries {
    /// Linear fit over the final `fraction` of the series.
    pub fn late_fit(&self, fraction: f64) -> LinearFit {
        let t_end = *self.times.last().unwrap_or(&0.0);
        window_fit(&self.times, &self.i_g, t_end * (1.0 - fraction), t_end)
    }
}

/// `I_G(t)` from the closed-form moments, on `samples + 1` equally spaced
/// times covering `[0, t_end]`.
///
/// The double time integral of the second-derivative trace is reduced to
/// single integrals over each output interval, which are evaluated by
/// adaptive Gauss–Kronrod quadrature and accumulated with exact exponential
/// propagation between output times.
pub fn qfi_time_domain(p: &SystemParams, t_end: f64, samples: usize) -> Result<QfiSeries> {
    if !(t_end >= 0.0 && t_end.is_finite()) || samples == 0 {
        return Err(Error::InvalidParameter("need t_end >= 0 and at least one sample".into()));
    }
    if p.delta_epsilon() <= 0.0 {
        return Err(if p.delta_epsilon() == 0.0 {
            Error::OnBoundary
        } else {
            Error::OutsidePhase { epsilon: p.epsilon(), epsilon_c: p.epsilon_c() }
        });
    }
    let lc = LangevinCoefficients::new(p)?;
    let (w, e, k) = (lc.omega, lc.epsilon, lc.kappa);
    let d = c(e * e - w * w);
    let sq = lc.root;
    let rates = [c(k), k + 2.0 * sq, k - 2.0 * sq];
    let coeffs = |f: [Complex64; 3]| -> [Complex64; 3] {
        let common = 2.0 * e * e * f[0] + w * e * f[1];
        let odd = I * e * sq * f[2];
        [-(w * w * f[0] + 0.5 * w * e * f[1]) / d, (common + odd) / (4.0 * d), (common - odd) / (4.0 * d)]
    };

    let h = t_end / samples as f64;
    let step_decay: Vec<Complex64> = rates.iter().map(|r| (-r * h).exp()).collect();
    let mut cum = [c(0.0); 3];
    let mut conv = [c(0.0); 3];
    let mut times = vec![0.0];
    let mut i_g = vec![0.0];
    for s in 0..samples {
        let (a, b) = (s as f64 * h, (s + 1) as f64 * h);
        let panel = integrate_vec(
            |tau| {
                let cj = coeffs(source_vector(&lc, tau));
                let mut out = [c(0.0); 6];
                for j in 0..3 {
                    out[j] = cj[j];
                    out[3 + j] = cj[j] * (-rates[j] * (b - tau)).exp();
                }
                out
            },
            a,
            b,
            1e-13,
            1e-10,
        )?;
        for j in 0..3 {
            cum[j] += panel[j];
            conv[j] = conv[j] * step_decay[j] + panel[3 + j];
        }
        let second: Complex64 = (0..3).map(|j| -8.0 * (cum[j] - conv[j]) / rates[j]).sum();
        let int_n = lc.occupation_parts(b).2;
        times.push(b);
        i_g.push(-second.re - 4.0 * int_n * int_n);
    }
    Ok(QfiSeries { times, i_g })
}

/// Length of run after which every transient of `I_G` has decayed by
/// roughly `e^{-20}` over the last 40% used for slope fits.
pub fn suggested_duration(p: &SystemParams) -> Result<f64> {
    let lc = LangevinCoefficients::new(p)?;
    let slow = 2.0 * lc.lambda_minus.re;
    if slow <= 0.0 {
        return Err(Error::OutsidePhase { epsilon: p.epsilon(), epsilon_c: p.epsilon_c() });
    }
    Ok((50.0 / slow).max(40.0 / p.kappa()))
}

/// Slope of a late-window fit to [`qfi_time_domain`] over a run of
/// [`suggested_duration`].
pub fn qfi_rate_time_domain(p: &SystemParams) -> Result<LinearFit> {
    let t_end = suggested_duration(p)?;
    let series = qfi_time_domain(p, t_end, 400)?;
    Ok(series.late_fit(0.4))
}
