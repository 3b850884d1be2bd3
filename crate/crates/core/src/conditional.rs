//! Conditional Gaussian state under continuous general-dyne monitoring.
//!
//! The covariance obeys the record-independent Riccati equation
//!
//! ```text
//! dΣ/dt = AΣ + ΣAᵀ + D − ηκ (Σ − I) B² (Σ − I)
//! ```
//!
//! so a single deterministic solution serves every trajectory. The mean and
//! the integrated photocurrent are driven by the same Wiener increments:
//!
//! ```text
//! dr = A r dt + sqrt(ηκ/2) (Σ − I) B dw
//! dy = sqrt(2κη) B r dt + dw
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{solve_lyapunov, Matrix2, SymMatrix2, Vector2};
use crate::model::{drift_matrix, MeasurementParams, SystemParams};
use crate::ode::{rk4_step, step_count};
use crate::parallel::map_indexed;

/// Mean vector and covariance of a Gaussian state at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianState {
    pub r: Vector2<f64>,
    pub sigma: SymMatrix2,
    pub t: f64,
}

impl GaussianState {
    pub fn vacuum() -> Self {
        Self { r: Vector2::zeros(), sigma: SymMatrix2::identity(), t: 0.0 }
    }
}

impl Default for GaussianState {
    fn default() -> Self {
        Self::vacuum()
    }
}

/// Coefficients of the Riccati right-hand side for one parameter set.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RiccatiCoefficients {
    pub a: Matrix2<f64>,
    pub d: SymMatrix2,
    pub b: Matrix2<f64>,
    pub b2: Matrix2<f64>,
    /// `ηκ`
    pub gain: f64,
}

impl RiccatiCoefficients {
    pub fn new(p: &SystemParams, m: &MeasurementParams) -> Self {
        let b = m.b_matrix().to_matrix();
        Self { a: drift_matrix(p), d: p.diffusion_matrix(), b, b2: b * b, gain: m.eta() * p.kappa() }
    }

    pub fn rhs(&self, s: &SymMatrix2) -> SymMatrix2 {
        let sm = s.to_matrix();
        let e = sm - Matrix2::identity();
        let drift = self.a * sm + sm * self.a.transpose();
        let back = e * self.b2 * e;
        SymMatrix2::from_matrix(&(drift - back * self.gain)) + self.d
    }
}

/// Covariance sampled on a uniform grid, `values[k] = Σ(k·dt)`.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceSeries {
    pub dt: f64,
    pub values: Vec<SymMatrix2>,
}

impl CovarianceSeries {
    pub fn t_end(&self) -> f64 {
        self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn last(&self) -> SymMatrix2 {
        *self.values.last().expect("series always holds the initial value")
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| k as f64 * self.dt)
    }

    /// Piecewise-linear interpolation, clamped to the covered interval.
    pub fn at(&self, t: f64) -> SymMatrix2 {
        let x = (t / self.dt).max(0.0);
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return self.last();
        }
        let w = x - k as f64;
        self.values[k] * (1.0 - w) + self.values[k + 1] * w
    }
}

fn validate_grid(t_end: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {t_end}")));
    }
    Ok(())
}

fn validate_covariance(s: &SymMatrix2) -> Result<()> {
    if !s.is_finite() || s.xx <= 0.0 || s.det() <= 0.0 {
        return Err(Error::InvalidParameter(format!("initial covariance {s:?} is not positive definite")));
    }
    Ok(())
}

fn rk4_sym(c: &RiccatiCoefficients, s: &SymMatrix2, h: f64) -> SymMatrix2 {
    let mut f = |_t: f64, y: &[f64; 3]| c.rhs(&SymMatrix2::from_array(*y)).as_array();
    SymMatrix2::from_array(rk4_step(&mut f, 0.0, &s.as_array(), h))
}

/// Integrates the Riccati equation from `sigma0` over `[0, t_end]`.
///
/// The step is shrunk slightly so that an integer number of steps lands on
/// `t_end`; the step actually used is reported in the result.
pub fn integrate_covariance(p: &SystemParams, m: &MeasurementParams, sigma0: SymMatrix2, t_end: f64, dt: f64) -> Result<CovarianceSeries> {
    validate_grid(t_end, dt)?;
    validate_covariance(&sigma0)?;
    let n = step_count(t_end, dt);
    let h = if n == 0 { dt } else { t_end / n as f64 };
    let c = RiccatiCoefficients::new(p, m);
    let mut values = Vec::with_capacity(n + 1);
    values.push(sigma0);
    let mut s = sigma0;
    for k in 0..n {
        s = rk4_sym(&c, &s, h);
        if !s.is_finite() || s.det() <= 0.0 {
            return Err(Error::StepTooLarge { t: (k + 1) as f64 * h });
        }
        values.push(s);
    }
    Ok(CovarianceSeries { dt: h, values })
}

/// Settings for [`steady_covariance`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SteadyOptions {
    /// Convergence threshold on `‖dΣ/dt‖ / ‖Σ‖`.
    pub tol: f64,
    pub dt: f64,
    /// Length of the integration window.
    pub t_max: f64,
    /// `[Σ]_p` above which the state is declared divergent.
    pub divergence_threshold: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { tol: 1e-10, dt: 1e-2, t_max: 5000.0, divergence_threshold: 1e6 }
    }
}

/// Converged conditional steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyCovariance {
    pub sigma: SymMatrix2,
    /// Time at which the convergence criterion was first met.
    pub t: f64,
}

/// Integrates from vacuum until the covariance stops changing.
///
/// Returns [`Error::Diverged`] when `[Σ]_p` exceeds the divergence threshold,
/// or when the window ends with `[Σ]_p` still rising throughout its final
/// fifth. A window that ends unconverged without that sustained growth yields
/// [`Error::NotConverged`].
pub fn steady_covariance(p: &SystemParams, m: &MeasurementParams, opts: &SteadyOptions) -> Result<SteadyCovariance> {
    validate_grid(opts.t_max, opts.dt)?;
    if p.delta_epsilon() < 0.0 {
        return Err(Error::OutsidePhase { epsilon: p.epsilon(), epsilon_c: p.epsilon_c() });
    }
    let c = RiccatiCoefficients::new(p, m);
    let n = step_count(opts.t_max, opts.dt);
    let h = opts.t_max / n.max(1) as f64;
    let tail_start = n - n / 5;
    let mut s = SymMatrix2::identity();
    let mut rising = true;
    let mut prev_p = s.pp;
    for k in 0..n {
        let t = (k + 1) as f64 * h;
        let next = rk4_sym(&c, &s, h);
        if !next.is_finite() || next.det() <= 0.0 {
            return Err(Error::StepTooLarge { t });
        }
        if next.pp > opts.divergence_threshold {
            return Err(Error::Diverged { t, sigma_p: next.pp });
        }
        let rate = c.rhs(&next).norm() / next.norm();
        s = next;
        if rate < opts.tol {
            return Ok(SteadyCovariance { sigma: s, t });
        }
        if k >= tail_start {
            rising &= s.pp > prev_p;
        }
        prev_p = s.pp;
    }
    if rising {
        Err(Error::Diverged { t: opts.t_max, sigma_p: s.pp })
    } else {
        Err(Error::NotConverged { t_end: opts.t_max })
    }
}

/// Outcome of [`steady_covariance`] at one frequency of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub omega: f64,
    pub outcome: std::result::Result<SteadyCovariance, Error>,
}

impl ScanPoint {
    /// `[Σ]_p` at the end of the run, whether or not it converged.
    pub fn final_sigma_p(&self) -> Option<f64> {
        match &self.outcome {
            Ok(s) => Some(s.sigma.pp),
            Err(Error::Diverged { sigma_p, .. }) => Some(*sigma_p),
            Err(_) => None,
        }
    }

    pub fn diverged(&self) -> bool {
        matches!(self.outcome, Err(Error::Diverged { .. }))
    }
}

/// Steady states along `omegas` at fixed boundary distance `delta_epsilon`.
pub fn divergence_scan(
    omegas: &[f64],
    delta_epsilon: f64,
    kappa: f64,
    m: &MeasurementParams,
    opts: &SteadyOptions,
    threads: usize,
) -> Result<Vec<ScanPoint>> {
    let params: Vec<SystemParams> = omegas.iter().map(|&w| SystemParams::near_boundary(w, delta_epsilon, kappa)).collect::<Result<_>>()?;
    Ok(map_indexed(omegas.len(), threads, |i| ScanPoint { omega: omegas[i], outcome: steady_covariance(&params[i], m, opts) }))
}

/// Frequency with the largest final `[Σ]_p` in a scan.
pub fn locate_divergence(scan: &[ScanPoint]) -> Option<f64> {
    scan.iter().filter_map(|p| p.final_sigma_p().map(|s| (p.omega, s))).max_by(|a, b| a.1.total_cmp(&b.1)).map(|(w, _)| w)
}

/// Final covariance of a fixed-length window regardless of convergence.
pub fn covariance_after(p: &SystemParams, m: &MeasurementParams, t: f64, dt: f64) -> Result<SymMatrix2> {
    validate_grid(t, dt)?;
    let c = RiccatiCoefficients::new(p, m);
    let n = step_count(t, dt);
    let h = if n == 0 { dt } else { t / n as f64 };
    let mut s = SymMatrix2::identity();
    for k in 0..n {
        s = rk4_sym(&c, &s, h);
        if !s.is_finite() || s.det() <= 0.0 {
            return Err(Error::StepTooLarge { t: (k + 1) as f64 * h });
        }
    }
    Ok(s)
}

/// Stabilizing solution of the algebraic Riccati equation by Newton–Kleinman
/// iteration from `Σ = I`.
///
/// Requires the normal phase, where the starting closed-loop matrix `A` is
/// Hurwitz.
pub fn algebraic_steady_covariance(p: &SystemParams, m: &MeasurementParams) -> Result<SymMatrix2> {
    p.require_normal_phase()?;
    let c = RiccatiCoefficients::new(p, m);
    let g = c.b2 * c.gain;
    let a_hat = c.a + g;
    let q = c.d.to_matrix() - g;
    let mut s = Matrix2::<f64>::identity();
    for _ in 0..200 {
        let closed = a_hat - s * g;
        let rhs = SymMatrix2::from_matrix(&(-(q + s * g * s)));
        let next = solve_lyapunov(&closed, &rhs).ok_or(Error::SingularSylvester)?.to_matrix();
        let change = (next - s).abs().max();
        s = next;
        if change <= 1e-14 * s.abs().max() {
            let out = SymMatrix2::from_matrix(&s);
            if c.rhs(&out).norm() > 1e-8 * out.norm().max(1.0) {
                break;
            }
            return Ok(out);
        }
    }
    Err(Error::NotConverged { t_end: f64::INFINITY })
}

/// One sample of a conditional trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: Vector2<f64>,
    /// Integrated photocurrent.
    pub y: Vector2<f64>,
}

/// Single conditional trajectory with its integrated photocurrent record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub seed: u64,
    pub dt: f64,
    pub samples: Vec<TrajectorySample>,
}

/// Noise source for trajectory `index` of an ensemble seeded with `seed`.
fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

struct EulerMaruyama<'a> {
    a: Matrix2<f64>,
    b: Matrix2<f64>,
    noise_gain: f64,
    signal_gain: f64,
    sqrt_dt: f64,
    dt: f64,
    sigma: &'a CovarianceSeries,
}

impl<'a> EulerMaruyama<'a> {
    fn new(p: &SystemParams, m: &MeasurementParams, sigma: &'a CovarianceSeries) -> Self {
        let c = RiccatiCoefficients::new(p, m);
        Self {
            a: c.a,
            b: c.b,
            noise_gain: (0.5 * c.gain).sqrt(),
            signal_gain: (2.0 * c.gain).sqrt(),
            sqrt_dt: sigma.dt.sqrt(),
            dt: sigma.dt,
            sigma,
        }
    }

    #[inline]
    fn step(&self, k: usize, r: &mut Vector2<f64>, y: &mut Vector2<f64>, rng: &mut ChaCha8Rng) {
        let z0: f64 = StandardNormal.sample(rng);
        let z1: f64 = StandardNormal.sample(rng);
        let dw = Vector2::new(z0, z1) * self.sqrt_dt;
        let e = self.sigma.values[k].to_matrix() - Matrix2::identity();
        let r_old = *r;
        *r += self.a * r_old * self.dt + e * self.b * dw * self.noise_gain;
        *y += self.b * r_old * (self.signal_gain * self.dt) + dw;
    }
}

/// Euler–Maruyama trajectory from `state0` over `[0, t_end]`, recording every step.
pub fn simulate_trajectory(
    p: &SystemParams,
    m: &MeasurementParams,
    state0: &GaussianState,
    t_end: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    m.require_signal()?;
    let sigma = integrate_covariance(p, m, state0.sigma, t_end, dt)?;
    Ok(trajectory_on(p, m, &sigma, state0, seed, 0))
}

fn trajectory_on(
    p: &SystemParams,
    m: &MeasurementParams,
    sigma: &CovarianceSeries,
    state0: &GaussianState,
    seed: u64,
    index: u64,
) -> Trajectory {
    let em = EulerMaruyama::new(p, m, sigma);
    let mut rng = trajectory_rng(seed, index);
    let (mut r, mut y) = (state0.r, Vector2::zeros());
    let n = sigma.values.len();
    let mut samples = Vec::with_capacity(n);
    samples.push(TrajectorySample { t: state0.t, r, y });
    for k in 0..n - 1 {
        em.step(k, &mut r, &mut y, &mut rng);
        samples.push(TrajectorySample { t: state0.t + (k + 1) as f64 * sigma.dt, r, y });
    }
    Trajectory { seed, dt: sigma.dt, samples }
}

/// Settings for [`simulate_ensemble`].
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleOptions {
    pub trajectories: usize,
    pub dt: f64,
    pub seed: u64,
    /// Times at which ensemble statistics are collected.
    pub probe_times: Vec<f64>,
    pub threads: usize,
}

/// Sample means and standard errors at one probe time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleStatistic {
    pub t: f64,
    pub yy_mean: f64,
    pub yy_se: f64,
    pub r_mean: Vector2<f64>,
    pub rr_mean: SymMatrix2,
    pub rr_se: SymMatrix2,
}

/// Runs an ensemble of vacuum-initialised trajectories sharing one covariance
/// solution and returns statistics of `yᵀy`, `r` and `r rᵀ` at the probe times.
///
/// Trajectory `i` draws its noise from stream `i` of a generator seeded with
/// `seed`, so results do not depend on the worker count.
pub fn simulate_ensemble(p: &SystemParams, m: &MeasurementParams, opts: &EnsembleOptions) -> Result<Vec<EnsembleStatistic>> {
    m.require_signal()?;
    if opts.trajectories < 2 {
        return Err(Error::InvalidParameter("an ensemble needs at least two trajectories".into()));
    }
    let t_end = opts.probe_times.iter().cloned().fold(0.0, f64::max);
    let sigma = integrate_covariance(p, m, SymMatrix2::identity(), t_end, opts.dt)?;
    let probe_idx: Vec<usize> = opts.probe_times.iter().map(|t| ((t / sigma.dt).round() as usize).min(sigma.values.len() - 1)).collect();
    let last = probe_idx.iter().copied().max().unwrap_or(0);

    let per_traj: Vec<Vec<[f64; 6]>> = map_indexed(opts.trajectories, opts.threads, |i| {
        let em = EulerMaruyama::new(p, m, &sigma);
        let mut rng = trajectory_rng(opts.seed, i as u64);
        let (mut r, mut y) = (Vector2::zeros(), Vector2::zeros());
        let mut at = vec![[0.0; 6]; probe_idx.len()];
        let record = |k: usize, r: &Vector2<f64>, y: &Vector2<f64>, at: &mut Vec<[f64; 6]>| {
            for (slot, &pk) in probe_idx.iter().enumerate() {
                if pk == k {
                    at[slot] = [y.norm_squared(), r[0], r[1], r[0] * r[0], r[0] * r[1], r[1] * r[1]];
                }
            }
        };
        record(0, &r, &y, &mut at);
        for k in 0..last {
            em.step(k, &mut r, &mut y, &mut rng);
            record(k + 1, &r, &y, &mut at);
        }
        at
    });

    let n = opts.trajectories as f64;
    Ok(probe_idx
        .iter()
        .enumerate()
        .map(|(slot, &k)| {
            let mut mean = [0.0; 6];
            for tr in &per_traj {
                for j in 0..6 {
                    mean[j] += tr[slot][j];
                }
            }
            mean.iter_mut().for_each(|v| *v /= n);
            let mut var = [0.0; 6];
            for tr in &per_traj {
                for j in 0..6 {
                    var[j] += (tr[slot][j] - mean[j]).powi(2);
                }
            }
            let se: Vec<f64> = var.iter().map(|v| (v / (n - 1.0) / n).sqrt()).collect();
            EnsembleStatistic {
                t: k as f64 * sigma.dt,
                yy_mean: mean[0],
                yy_se: se[0],
                r_mean: Vector2::new(mean[1], mean[2]),
                rr_mean: SymMatrix2::new(mean[3], mean[4], mean[5]),
                rr_se: SymMatrix2::new(se[3], se[4], se[5]),
            }
        })
        .collect())
}
