//! Record-averaged second moments as deterministic ODEs.
//!
//! Writing `E = Σ − I`, `Ã = A − ηκ E B²` and `∂ = ∂/∂ω`, the moments evolve as
//!
//! ```text
//! dΣ      = AΣ + ΣAᵀ + D − ηκ E B² E
//! d∂Σ     = Ã∂Σ + ∂ΣÃᵀ + ∂A Σ + Σ ∂Aᵀ
//! dE[rrᵀ] = A E[rrᵀ] + E[rrᵀ] Aᵀ + (κη/2) E B² E
//! dE[∂r rᵀ]  = ∂A E[rrᵀ] + Ã E[∂r rᵀ] + E[∂r rᵀ] Aᵀ + (κη/2) ∂Σ B² E
//! dE[∂r ∂rᵀ] = ∂A E[∂r rᵀ]ᵀ + E[∂r rᵀ] ∂Aᵀ + Ã E[∂r∂rᵀ] + E[∂r∂rᵀ] Ãᵀ + (κη/2) ∂Σ B² ∂Σ
//! dE[r yᵀ]   = A E[r yᵀ] + sqrt(2κη) E[rrᵀ] B + sqrt(ηκ/2) E B
//! dE[yᵀy]    = 2 sqrt(2κη) tr(B E[r yᵀ]) + 2
//! ```
//!
//! with every quantity starting from zero and `Σ(0) = I`.

use serde::Serialize;

use crate::conditional::{algebraic_steady_covariance, RiccatiCoefficients};
use crate::error::{Error, Result};
use crate::linalg::{solve_lyapunov, solve_sylvester, Matrix2, SymMatrix2};
use crate::model::{drift_omega_derivative, MeasurementParams, SystemParams};
use crate::ode::{rk4_step, step_count};
use crate::parallel::map_indexed;

const DIM: usize = 21;

/// Second moments at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSet {
    pub t: f64,
    pub sigma: SymMatrix2,
    /// `∂Σ/∂ω`
    pub dsigma: SymMatrix2,
    /// `E[r rᵀ]`
    pub err: SymMatrix2,
    /// `E[(∂r)(∂r)ᵀ]`
    pub edrdr: SymMatrix2,
    /// `E[(∂r) rᵀ]`
    pub edrr: Matrix2<f64>,
    /// `E[r yᵀ]`
    pub ery: Matrix2<f64>,
    /// `E[yᵀ y]`
    pub eyy: f64,
}

fn mat_from(y: &[f64], at: usize) -> Matrix2<f64> {
    Matrix2::new(y[at], y[at + 1], y[at + 2], y[at + 3])
}

fn mat_into(m: &Matrix2<f64>, y: &mut [f64], at: usize) {
    y[at] = m[(0, 0)];
    y[at + 1] = m[(0, 1)];
    y[at + 2] = m[(1, 0)];
    y[at + 3] = m[(1, 1)];
}

fn sym_from(y: &[f64], at: usize) -> SymMatrix2 {
    SymMatrix2::new(y[at], y[at + 1], y[at + 2])
}

fn sym_into(s: &SymMatrix2, y: &mut [f64], at: usize) {
    y[at] = s.xx;
    y[at + 1] = s.xp;
    y[at + 2] = s.pp;
}

// State layout: Σ 0..3, ∂Σ 3..6, E[rrᵀ] 6..9, E[∂r∂rᵀ] 9..12, E[∂r rᵀ] 12..16, E[r yᵀ] 16..20, E[yᵀy] 20.
fn unpack(t: f64, y: &[f64; DIM]) -> MomentSet {
    MomentSet {
        t,
        sigma: sym_from(y, 0),
        dsigma: sym_from(y, 3),
        err: sym_from(y, 6),
        edrdr: sym_from(y, 9),
        edrr: mat_from(y, 12),
        ery: mat_from(y, 16),
        eyy: y[20],
    }
}

struct MomentRhs {
    c: RiccatiCoefficients,
    da: Matrix2<f64>,
    half_gain: f64,
    root_half_gain: f64,
    root_twice_gain: f64,
}

impl MomentRhs {
    fn new(p: &SystemParams, m: &MeasurementParams) -> Self {
        let c = RiccatiCoefficients::new(p, m);
        Self {
            da: drift_omega_derivative(),
            half_gain: 0.5 * c.gain,
            root_half_gain: (0.5 * c.gain).sqrt(),
            root_twice_gain: (2.0 * c.gain).sqrt(),
            c,
        }
    }

    fn eval(&self, y: &[f64; DIM]) -> [f64; DIM] {
        let c = &self.c;
        let s = sym_from(y, 0);
        let sm = s.to_matrix();
        let e = sm - Matrix2::identity();
        let ds = sym_from(y, 3).to_matrix();
        let err = sym_from(y, 6).to_matrix();
        let edd = sym_from(y, 9).to_matrix();
        let edr = mat_from(y, 12);
        let ery = mat_from(y, 16);
        let a = c.a;
        let at = a.transpose();
        let da = self.da;
        let eb2 = e * c.b2;
        let a_tilde = a - eb2 * c.gain;
        let dsb2 = ds * c.b2;

        let mut out = [0.0; DIM];
        sym_into(&c.rhs(&s), &mut out, 0);
        let d_ds = a_tilde * ds + ds * a_tilde.transpose() + da * sm + sm * da.transpose();
        sym_into(&SymMatrix2::from_matrix(&d_ds), &mut out, 3);
        let d_err = a * err + err * at + eb2 * e * self.half_gain;
        sym_into(&SymMatrix2::from_matrix(&d_err), &mut out, 6);
        let d_edd = da * edr.transpose() + edr * da.transpose() + a_tilde * edd + edd * a_tilde.transpose() + dsb2 * ds * self.half_gain;
        sym_into(&SymMatrix2::from_matrix(&d_edd), &mut out, 9);
        let d_edr = da * err + a_tilde * edr + edr * at + dsb2 * e * self.half_gain;
        mat_into(&d_edr, &mut out, 12);
        let d_ery = a * ery + err * c.b * self.root_twice_gain + e * c.b * self.root_half_gain;
        mat_into(&d_ery, &mut out, 16);
        out[20] = 2.0 * self.root_twice_gain * (c.b * ery).trace() + 2.0;
        out
    }
}

/// Step-by-step integrator for the coupled moment system.
pub struct MomentIntegrator {
    rhs: MomentRhs,
    y: [f64; DIM],
    t: f64,
    dt: f64,
}

impl MomentIntegrator {
    pub fn new(p: &SystemParams, m: &MeasurementParams, dt: f64) -> Result<Self> {
        p.require_normal_phase()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let mut y = [0.0; DIM];
        sym_into(&SymMatrix2::identity(), &mut y, 0);
        Ok(Self { rhs: MomentRhs::new(p, m), y, t: 0.0, dt })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn current(&self) -> MomentSet {
        unpack(self.t, &self.y)
    }

    /// Advances by one step of size `h` (defaults to the configured step).
    pub fn step_by(&mut self, h: f64) -> Result<()> {
        let rhs = &self.rhs;
        let mut f = |_t: f64, y: &[f64; DIM]| rhs.eval(y);
        let next = rk4_step(&mut f, self.t, &self.y, h);
        self.t += h;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::StepTooLarge { t: self.t });
        }
        self.y = next;
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        self.step_by(self.dt)
    }
}

/// Options for [`evolve_moments`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentOptions {
    pub dt: f64,
    /// Keep every `record_every`-th step (the final time is always kept).
    pub record_every: usize,
}

impl Default for MomentOptions {
    fn default() -> Self {
        Self { dt: 1e-2, record_every: 100 }
    }
}

/// Integrates all moments from vacuum over `[0, t_end]`.
pub fn evolve_moments(p: &SystemParams, m: &MeasurementParams, t_end: f64, opts: &MomentOptions) -> Result<Vec<MomentSet>> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {t_end}")));
    }
    let n = step_count(t_end, opts.dt);
    let h = if n == 0 { opts.dt } else { t_end / n as f64 };
    let every = opts.record_every.max(1);
    let mut it = MomentIntegrator::new(p, m, h)?;
    let mut out = vec![it.current()];
    for k in 1..=n {
        it.step()?;
        if k % every == 0 || k == n {
            out.push(it.current());
        }
    }
    Ok(out)
}

/// Moments at a single time.
pub fn moments_at(p: &SystemParams, m: &MeasurementParams, t: f64, dt: f64) -> Result<MomentSet> {
    let opts = MomentOptions { dt, record_every: usize::MAX };
    Ok(*evolve_moments(p, m, t, &opts)?.last().expect("at least the initial state"))
}

/// Long-time limits of the moments that converge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryMoments {
    pub sigma: SymMatrix2,
    pub dsigma: SymMatrix2,
    pub err: SymMatrix2,
    pub edrr: Matrix2<f64>,
    pub edrdr: SymMatrix2,
}

/// Fixed points of the moment equations from linear-matrix-equation solves.
pub fn stationary_moments(p: &SystemParams, m: &MeasurementParams) -> Result<StationaryMoments> {
    let sigma = algebraic_steady_covariance(p, m)?;
    let c = RiccatiCoefficients::new(p, m);
    let da = drift_omega_derivative();
    let sm = sigma.to_matrix();
    let e = sm - Matrix2::identity();
    let half_gain = 0.5 * c.gain;
    let a_tilde = c.a - e * c.b2 * c.gain;
    let singular = || Error::SingularSylvester;

    let forcing = SymMatrix2::from_matrix(&(da * sm + sm * da.transpose()));
    let dsigma = solve_lyapunov(&a_tilde, &forcing.scale(-1.0)).ok_or_else(singular)?;
    let ds = dsigma.to_matrix();
    let err = solve_lyapunov(&c.a, &SymMatrix2::from_matrix(&(e * c.b2 * e)).scale(-half_gain)).ok_or_else(singular)?;
    let edrr = solve_sylvester(&a_tilde, &c.a, &(-(da * err.to_matrix() + ds * c.b2 * e * half_gain))).ok_or_else(singular)?;
    let edd_forcing = SymMatrix2::from_matrix(&(da * edrr.transpose() + edrr * da.transpose() + ds * c.b2 * ds * half_gain));
    let edrdr = solve_lyapunov(&a_tilde, &edd_forcing.scale(-1.0)).ok_or_else(singular)?;
    Ok(StationaryMoments { sigma, dsigma, err, edrr, edrdr })
}

/// `E[yᵀy](t_probe)` along a frequency sweep at fixed boundary distance.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceProfile {
    pub delta_epsilon: f64,
    pub t_probe: f64,
    /// `(ω, E[yᵀy])` per grid point, in grid order.
    pub points: Vec<(f64, f64)>,
    /// Location of the minimum after parabolic refinement through the three
    /// grid points around the discrete minimum.
    pub argmin: f64,
    pub min_value: f64,
}

/// Sweep of the integrated-photocurrent variance over `omegas` at fixed `δε`.
pub fn photocurrent_variance_profile(
    omegas: &[f64],
    delta_epsilon: f64,
    kappa: f64,
    m: &MeasurementParams,
    t_probe: f64,
    dt: f64,
    threads: usize,
) -> Result<VarianceProfile> {
    if omegas.is_empty() {
        return Err(Error::InvalidParameter("empty frequency grid".into()));
    }
    let values = map_indexed(omegas.len(), threads, |i| {
        let p = SystemParams::near_boundary(omegas[i], delta_epsilon, kappa)?;
        moments_at(&p, m, t_probe, dt).map(|s| s.eyy)
    });
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = omegas.iter().copied().zip(values.iter().copied()).collect();
    let (k, _) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    let (argmin, min_value) = parabolic_vertex(&points, k);
    Ok(VarianceProfile { delta_epsilon, t_probe, points, argmin, min_value })
}

/// Vertex of the parabola through the grid minimum and its neighbours; falls
/// back to the grid point at the ends of the sweep or for a degenerate fit.
pub(crate) fn parabolic_vertex(points: &[(f64, f64)], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= points.len() {
        return points[k];
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    let (x2, y2) = points[k + 1];
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a.abs() <= f64::EPSILON * y1.abs().max(1.0) {
        return points[k];
    }
    let b = d01 - a * (x0 + x1);
    let xv = (-b / (2.0 * a)).clamp(x0, x2);
    let yv = y1 + d01 * (xv - x1) + a * (xv - x1) * (xv - x0);
    (xv, yv)
}
