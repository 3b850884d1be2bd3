//! Oscillator and detector parameters together with the closed-form
//! quantities derived from them.
//!
//! The Hamiltonian is `H = ω a†a + (ε/2)(a†² + a²)` with single-photon loss at
//! rate κ. In quadrature variables the unconditional dynamics are linear with
//! drift [`drift_matrix`] and diffusion `D = κ I`.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rotation, solve_sylvester, Matrix2, SymMatrix2};

fn require_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {value}")))
    }
}

/// Physical constants of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystemParams")]
pub struct SystemParams {
    omega: f64,
    epsilon: f64,
    kappa: f64,
    chi: f64,
}

#[derive(Deserialize)]
struct RawSystemParams {
    omega: f64,
    epsilon: f64,
    #[serde(default = "one")]
    kappa: f64,
    #[serde(default)]
    chi: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawSystemParams> for SystemParams {
    type Error = Error;
    fn try_from(r: RawSystemParams) -> Result<Self> {
        Self::with_kerr(r.omega, r.epsilon, r.kappa, r.chi)
    }
}

impl SystemParams {
    /// Oscillator in the Gaussian limit (χ = 0).
    pub fn new(omega: f64, epsilon: f64, kappa: f64) -> Result<Self> {
        Self::with_kerr(omega, epsilon, kappa, 0.0)
    }

    /// Full constructor. Only `chi == 0` is supported.
    pub fn with_kerr(omega: f64, epsilon: f64, kappa: f64, chi: f64) -> Result<Self> {
        require_finite("omega", omega)?;
        require_finite("epsilon", epsilon)?;
        require_finite("kappa", kappa)?;
        if kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
        }
        if omega <= 0.0 {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if epsilon < 0.0 {
            return Err(Error::InvalidParameter(format!("epsilon must be non-negative, got {epsilon}")));
        }
        if chi != 0.0 {
            return Err(Error::InvalidParameter(format!("only the scaling limit chi = 0 is supported, got {chi}")));
        }
        Ok(Self { omega, epsilon, kappa, chi })
    }

    /// Point at distance `delta_epsilon` below the phase boundary at frequency `omega`.
    pub fn near_boundary(omega: f64, delta_epsilon: f64, kappa: f64) -> Result<Self> {
        require_finite("delta_epsilon", delta_epsilon)?;
        let ec = critical_amplitude(omega, kappa);
        Self::new(omega, ec - delta_epsilon, kappa)
    }

    /// Unit-κ convenience used throughout examples and tests.
    pub fn unit(omega: f64, epsilon: f64) -> Result<Self> {
        Self::new(omega, epsilon, 1.0)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    /// Copy with a different frequency, keeping ε and κ.
    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        Self::new(omega, self.epsilon, self.kappa)
    }

    pub fn epsilon_c(&self) -> f64 {
        critical_amplitude(self.omega, self.kappa)
    }

    pub fn delta_epsilon(&self) -> f64 {
        self.epsilon_c() - self.epsilon
    }

    pub fn in_normal_phase(&self) -> bool {
        self.epsilon < self.epsilon_c()
    }

    pub fn require_normal_phase(&self) -> Result<()> {
        if self.in_normal_phase() {
            Ok(())
        } else {
            Err(Error::OutsidePhase { epsilon: self.epsilon, epsilon_c: self.epsilon_c() })
        }
    }

    pub fn geometry(&self) -> PhaseGeometry {
        PhaseGeometry { epsilon_c: self.epsilon_c(), delta_epsilon: self.delta_epsilon(), theta0: squeezing_angle(self) }
    }

    /// Diffusion matrix `D = κ I`.
    pub fn diffusion_matrix(&self) -> SymMatrix2 {
        SymMatrix2::diagonal(self.kappa, self.kappa)
    }
}

/// `ε_c = sqrt(ω² + κ²/4)`.
pub fn critical_amplitude(omega: f64, kappa: f64) -> f64 {
    omega.hypot(0.5 * kappa)
}

/// Where a parameter point sits relative to the phase boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGeometry {
    pub epsilon_c: f64,
    pub delta_epsilon: f64,
    pub theta0: f64,
}

/// General-dyne detector settings.
///
/// `s = 0` is homodyne detection of the quadrature at angle `phi`, `s = 1`
/// heterodyne detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasurementParams")]
pub struct MeasurementParams {
    s: f64,
    phi: f64,
    eta: f64,
}

#[derive(Deserialize)]
struct RawMeasurementParams {
    s: f64,
    phi: f64,
    eta: f64,
}

impl TryFrom<RawMeasurementParams> for MeasurementParams {
    type Error = Error;
    fn try_from(r: RawMeasurementParams) -> Result<Self> {
        Self::new(r.s, r.phi, r.eta)
    }
}

impl MeasurementParams {
    pub fn new(s: f64, phi: f64, eta: f64) -> Result<Self> {
        require_finite("s", s)?;
        require_finite("phi", phi)?;
        require_finite("eta", eta)?;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("s must lie in [0, 1], got {s}")));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {eta}")));
        }
        if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&phi) {
            return Err(Error::InvalidParameter(format!("phi must lie in [-pi, pi], got {phi}")));
        }
        Ok(Self { s, phi, eta })
    }

    pub fn homodyne(phi: f64, eta: f64) -> Result<Self> {
        Self::new(0.0, phi, eta)
    }

    pub fn heterodyne(eta: f64) -> Result<Self> {
        Self::new(1.0, 0.0, eta)
    }

    /// Unmonitored evolution.
    pub fn unmonitored() -> Self {
        Self { s: 0.0, phi: 0.0, eta: 0.0 }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(self.s, self.phi, eta)
    }

    pub fn require_signal(&self) -> Result<()> {
        if self.eta > 0.0 {
            Ok(())
        } else {
            Err(Error::EtaZero)
        }
    }

    pub fn b_matrix(&self) -> SymMatrix2 {
        measurement_matrix_b(self)
    }
}

/// Drift matrix `A = [[−κ/2, ω−ε], [−ω−ε, −κ/2]]`.
pub fn drift_matrix(p: &SystemParams) -> Matrix2<f64> {
    let h = -0.5 * p.kappa;
    Matrix2::new(h, p.omega - p.epsilon, -p.omega - p.epsilon, h)
}

/// `∂A/∂ω`, independent of the parameters.
pub fn drift_omega_derivative() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Detector matrix `B = R_φᵀ diag(1/sqrt(1+s), sqrt(s/(1+s))) R_φ`.
///
/// The efficiency enters every equation as an explicit prefactor `η`, so `B`
/// itself carries no `η` and is defined at `η = 0` as well. The diagonal is
/// written in closed form so that `s = 0` is exact.
pub fn measurement_matrix_b(m: &MeasurementParams) -> SymMatrix2 {
    let d1 = 1.0 / (1.0 + m.s).sqrt();
    let d2 = (m.s / (1.0 + m.s)).sqrt();
    let (sn, c) = m.phi.sin_cos();
    // R_φᵀ diag(d1, d2) R_φ with R_φ = [[c, sn], [−sn, c]].
    SymMatrix2::new(c * c * d1 + sn * sn * d2, c * sn * (d1 - d2), sn * sn * d1 + c * c * d2)
}

/// Steady covariance of the unmonitored oscillator.
pub fn unconditional_steady_covariance(p: &SystemParams) -> Result<SymMatrix2> {
    p.require_normal_phase()?;
    let ec2 = p.epsilon_c().powi(2);
    let (w, e, k) = (p.omega, p.epsilon, p.kappa);
    let den = ec2 - e * e;
    Ok(SymMatrix2::new((ec2 - w * e) / den, -0.5 * k * e / den, (ec2 + w * e) / den))
}

/// Angle `θ₀ = atan(κ/2ω)/2` of the quadrature squeezed in the unconditional state.
pub fn squeezing_angle(p: &SystemParams) -> f64 {
    0.5 * (p.kappa / (2.0 * p.omega)).atan()
}

/// Boundary point `(ω_be, ε_be)` at which homodyne detection at angle `phi`
/// evades backaction on the critical quadrature.
pub fn becp_from_angle(phi: f64, kappa: f64) -> Result<(f64, f64)> {
    if !(phi > 0.0 && phi < FRAC_PI_4) {
        return Err(Error::AngleOutOfRange(phi));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let (s2, c2) = (2.0 * phi).sin_cos();
    Ok((0.5 * kappa * c2 / s2, 0.5 * kappa / s2))
}

/// Homodyne backaction term `(Σ̄⁰ − I) B̄² (Σ̄⁰ − I)` in the frame rotated by `θ₀`.
pub fn backaction_functional(p: &SystemParams, phi: f64) -> Result<SymMatrix2> {
    p.require_normal_phase()?;
    let ec = p.epsilon_c();
    let e = p.epsilon;
    let d = squeezing_angle(p) - phi;
    let (sd, cd) = d.sin_cos();
    Ok(SymMatrix2::new(
        e * e * cd * cd / (ec + e).powi(2),
        e * e * (2.0 * d).sin() / (2.0 * (ec * ec - e * e)),
        e * e * sd * sd / (ec - e).powi(2),
    ))
}

/// First-order efficiency correction `Σ̄¹` to the rotated steady covariance
/// under homodyne detection at angle `phi`, from `Ā X + X Āᵀ = κ 𝓑`.
pub fn first_order_correction(p: &SystemParams, phi: f64) -> Result<SymMatrix2> {
    let forcing = backaction_functional(p, phi)?.scale(p.kappa);
    let r = rotation(squeezing_angle(p));
    let a_bar = r * drift_matrix(p) * r.transpose();
    let x = solve_sylvester(&a_bar, &a_bar, &forcing.to_matrix()).ok_or(Error::SingularSylvester)?;
    Ok(SymMatrix2::from_matrix(&x))
}
