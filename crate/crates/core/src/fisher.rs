//! Fisher information of the photocurrent record about ω.
//!
//! `F(t) = 2ηκ ∫₀ᵗ tr(B² E[(∂r)(∂r)ᵀ]) dτ`. Its long-time growth rate
//! `k_F = 2ηκ tr(B² E[(∂r)(∂r)ᵀ]_ss)` follows directly from the stationary
//! moments.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{MeasurementParams, SystemParams};
use crate::moments::{stationary_moments, MomentIntegrator, MomentSet};
use crate::optim::{maximize, Bounds, SimplexSettings};
use crate::parallel::map_indexed;

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares fit of `ys` against `xs`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LinearFit { slope, intercept: my - slope * mx, r2 }
}

/// Fit restricted to samples with `lo ≤ t ≤ hi`.
pub fn window_fit(times: &[f64], values: &[f64], lo: f64, hi: f64) -> LinearFit {
    let (xs, ys): (Vec<f64>, Vec<f64>) = times.iter().zip(values).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, v)| (*t, *v)).unzip();
    linear_fit(&xs, &ys)
}

fn fisher_rate(m: &MeasurementParams, kappa: f64, s: &MomentSet) -> f64 {
    let b = m.b_matrix().to_matrix();
    2.0 * m.eta() * kappa * (b * b * s.edrdr.to_matrix()).trace()
}

/// Settings for [`fisher_information`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FisherOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Keep every `record_every`-th step in the output series.
    pub record_every: usize,
    /// Relative change of the integrand per unit κt below which it counts as stationary.
    pub converge_tol: f64,
    /// Fraction of the run, counted from the end, used for the slope fit.
    pub fit_fraction: f64,
}

impl Default for FisherOptions {
    fn default() -> Self {
        Self { dt: 1e-2, t_end: 400.0, record_every: 100, converge_tol: 1e-8, fit_fraction: 0.4 }
    }
}

/// Fisher information time series and growth rate.
#[derive(Debug, Clone, Serialize)]
pub struct FisherResult {
    pub times: Vec<f64>,
    pub fisher: Vec<f64>,
    /// Growth rate from the stationary integrand.
    pub k_f: f64,
    /// Growth rate from a linear fit of `F(t)` over `fit_window`.
    pub k_f_fit: f64,
    pub fit_window: (f64, f64),
    pub fit_r2: f64,
    /// First time at which the integrand met the stationarity criterion.
    pub converged_at: f64,
}

/// Integrates the moment equations and accumulates `F(t)` by the trapezoidal rule.
pub fn fisher_information(p: &SystemParams, m: &MeasurementParams, opts: &FisherOptions) -> Result<FisherResult> {
    m.require_signal()?;
    let n = crate::ode::step_count(opts.t_end, opts.dt);
    if n == 0 {
        return Err(Error::InvalidParameter("t_end must exceed one step".into()));
    }
    let h = opts.t_end / n as f64;
    let every = opts.record_every.max(1);
    let mut it = MomentIntegrator::new(p, m, h)?;
    let kappa = p.kappa();
    let mut rate = fisher_rate(m, kappa, &it.current());
    let mut f = 0.0;
    let (mut times, mut fisher) = (vec![0.0], vec![0.0]);
    let mut converged_at = None;
    for k in 1..=n {
        it.step()?;
        let next = fisher_rate(m, kappa, &it.current());
        f += 0.5 * h * (rate + next);
        let change = (next - rate).abs() / h;
        if converged_at.is_none() && next > 0.0 && change < opts.converge_tol * next {
            converged_at = Some(it.t());
        } else if change >= opts.converge_tol * next.abs() {
            converged_at = None;
        }
        rate = next;
        if k % every == 0 || k == n {
            times.push(it.t());
            fisher.push(f);
        }
    }
    let converged_at = match converged_at {
        Some(t) => t,
        None if rate == 0.0 => 0.0,
        None => return Err(Error::NotConverged { t_end: opts.t_end }),
    };
    let lo = opts.t_end * (1.0 - opts.fit_fraction.clamp(0.05, 1.0));
    let fit = window_fit(&times, &fisher, lo, opts.t_end);
    let (k_f_fit, fit_r2) = if rate == 0.0 { (0.0, 1.0) } else { (fit.slope, fit.r2) };
    Ok(FisherResult { times, fisher, k_f: rate, k_f_fit, fit_window: (lo, opts.t_end), fit_r2, converged_at })
}

/// Growth rate `k_F` from the algebraic stationary moments.
pub fn steady_growth_rate(p: &SystemParams, m: &MeasurementParams) -> Result<f64> {
    if m.eta() == 0.0 {
        return Ok(0.0);
    }
    let st = stationary_moments(p, m)?;
    let b = m.b_matrix().to_matrix();
    Ok(2.0 * m.eta() * p.kappa() * (b * b * st.edrdr.to_matrix()).trace())
}

/// Search box and effort for [`optimize_measurement`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OptimizeOptions {
    pub phi_range: (f64, f64),
    pub grid_phi: usize,
    pub grid_s: usize,
    /// Number of successively finer grids centred on the incumbent.
    pub zoom_levels: usize,
    /// Points per axis on each zoom grid.
    pub zoom_points: usize,
    /// Evaluation budget of the simplex polish.
    pub budget: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { phi_range: (0.0, FRAC_PI_4), grid_phi: 25, grid_s: 11, zoom_levels: 4, zoom_points: 21, budget: 200 }
    }
}

/// One evaluated measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub s: f64,
    pub phi: f64,
    pub k_f: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub s_opt: f64,
    pub phi_opt: f64,
    pub k_f_opt: f64,
    /// `s_opt` sits on a face of the search box.
    pub s_at_bound: bool,
    pub phi_at_bound: bool,
    pub trace: Vec<TracePoint>,
}

/// Maximises `k_F` over `(s, φ)` at fixed efficiency.
///
/// A coarse grid over `φ ∈ (lo, hi]`, `s ∈ [0, 1]` is followed by zoom grids
/// around the incumbent (each spanning two spacings of the previous grid on
/// either side) and a bounded Nelder–Mead polish. The whole procedure is
/// deterministic.
pub fn optimize_measurement(p: &SystemParams, eta: f64, opts: &OptimizeOptions) -> Result<OptimizationResult> {
    p.require_normal_phase()?;
    MeasurementParams::new(0.0, 0.0, eta)?.require_signal()?;
    let (phi_lo, phi_hi) = opts.phi_range;
    if !(phi_hi > phi_lo) || opts.grid_phi == 0 || opts.grid_s < 2 {
        return Err(Error::InvalidParameter("degenerate optimisation grid".into()));
    }
    // φ = phi_lo itself is excluded, so the smallest admissible angle is a hair above it.
    let phi_min = phi_lo + 1e-9 * (phi_hi - phi_lo);
    let bounds = Bounds { lo: [phi_min, 0.0], hi: [phi_hi, 1.0] };
    let mut trace = Vec::new();
    let eval = |phi: f64, s: f64, trace: &mut Vec<TracePoint>| -> f64 {
        let k = MeasurementParams::new(s, phi, eta).and_then(|m| steady_growth_rate(p, &m));
        match k {
            Ok(k) if k.is_finite() => {
                trace.push(TracePoint { s, phi, k_f: k });
                k
            }
            _ => f64::NEG_INFINITY,
        }
    };

    let mut best = (f64::NAN, f64::NAN, f64::NEG_INFINITY);
    let consider = |phi: f64, s: f64, trace: &mut Vec<TracePoint>, best: &mut (f64, f64, f64)| {
        let k = eval(phi, s, trace);
        if k > best.2 {
            *best = (phi, s, k);
        }
    };

    let mut dphi = (phi_hi - phi_lo) / opts.grid_phi as f64;
    let mut ds = 1.0 / (opts.grid_s - 1) as f64;
    for i in 1..=opts.grid_phi {
        for j in 0..opts.grid_s {
            let phi = (phi_lo + i as f64 * dphi).min(phi_hi);
            consider(phi, (j as f64 * ds).min(1.0), &mut trace, &mut best);
        }
    }
    if !best.2.is_finite() {
        return Err(Error::NotConverged { t_end: f64::INFINITY });
    }

    let zp = opts.zoom_points.max(3);
    for _ in 0..opts.zoom_levels {
        let (c_phi, c_s) = (best.0, best.1);
        let (half_phi, half_s) = (2.0 * dphi, 2.0 * ds);
        dphi = 2.0 * half_phi / (zp - 1) as f64;
        ds = 2.0 * half_s / (zp - 1) as f64;
        for i in 0..zp {
            let phi = c_phi - half_phi + i as f64 * dphi;
            if phi < phi_min || phi > phi_hi {
                continue;
            }
            for j in 0..zp {
                let s = c_s - half_s + j as f64 * ds;
                if (0.0..=1.0).contains(&s) {
                    consider(phi, s, &mut trace, &mut best);
                }
            }
        }
    }

    let settings = SimplexSettings { max_evals: opts.budget, x_tol: 1e-9, ..Default::default() };
    let mut polish_trace = Vec::new();
    let ([phi, s], k) =
        maximize(|x| eval(x[0], x[1], &mut polish_trace), [best.0, best.1], [dphi.max(1e-6), ds.max(1e-6)], &bounds, &settings);
    trace.extend(polish_trace);
    if k > best.2 {
        best = (phi, s, k);
    }
    let (phi_opt, s_opt, k_f_opt) = best;
    Ok(OptimizationResult {
        s_opt,
        phi_opt,
        k_f_opt,
        s_at_bound: s_opt <= 0.0 || s_opt >= 1.0,
        phi_at_bound: phi_opt <= phi_min || phi_opt >= phi_hi,
        trace,
    })
}

/// One cell of a `k_F` landscape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapePoint {
    pub omega: f64,
    pub epsilon: f64,
    pub k_f: Option<f64>,
    /// `"ok"` or the error that prevented evaluation.
    pub status: String,
}

/// `k_F` on the Cartesian grid `omegas × epsilons`, in row-major order over ω.
pub fn kf_landscape(omegas: &[f64], epsilons: &[f64], m: &MeasurementParams, kappa: f64, threads: usize) -> Vec<LandscapePoint> {
    let ne = epsilons.len();
    map_indexed(omegas.len() * ne, threads, |idx| {
        let (omega, epsilon) = (omegas[idx / ne], epsilons[idx % ne]);
        let r = SystemParams::new(omega, epsilon, kappa).and_then(|p| steady_growth_rate(&p, m));
        match r {
            Ok(k) => LandscapePoint { omega, epsilon, k_f: Some(k), status: "ok".into() },
            Err(e) => LandscapePoint { omega, epsilon, k_f: None, status: e.to_string() },
        }
    })
}
