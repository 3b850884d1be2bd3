use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("detection efficiency is zero; the photocurrent carries no signal")]
    EtaZero,

    #[error("outside the normal phase: epsilon = {epsilon} >= epsilon_c = {epsilon_c}")]
    OutsidePhase { epsilon: f64, epsilon_c: f64 },

    #[error("squeezing angle {0} outside (0, pi/4)")]
    AngleOutOfRange(f64),

    #[error("Sylvester equation is singular (drift eigenvalues sum to zero)")]
    SingularSylvester,

    #[error("integration step produced an invalid state at t = {t}")]
    StepTooLarge { t: f64 },

    #[error("covariance diverged: [Sigma]_p = {sigma_p:.3e} at t = {t}")]
    Diverged { t: f64, sigma_p: f64 },

    #[error("not converged by t = {t_end}")]
    NotConverged { t_end: f64 },

    #[error("parameters lie on the phase boundary")]
    OnBoundary,

    #[error("degenerate spectrum: |epsilon - omega| = {gap:.3e} too small")]
    DegenerateSpectrum { gap: f64 },

    #[error("adaptive quadrature failed to reach tolerance (error estimate {estimate:.3e})")]
    QuadratureError { estimate: f64 },

    #[error("Fock truncation too small: dim {dim}, tail weight {tail:.3e}")]
    TruncationError { dim: usize, tail: f64 },

    #[error("finite-difference stencil unstable: halving h changed I_G by {rel_change:.3e}")]
    StencilUnstable { rel_change: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::EtaZero => "eta_zero",
            Error::OutsidePhase { .. } => "outside_phase",
            Error::AngleOutOfRange(_) => "angle_out_of_range",
            Error::SingularSylvester => "singular_sylvester",
            Error::StepTooLarge { .. } => "step_too_large",
            Error::Diverged { .. } => "diverged",
            Error::NotConverged { .. } => "not_converged",
            Error::OnBoundary => "on_boundary",
            Error::DegenerateSpectrum { .. } => "degenerate_spectrum",
            Error::QuadratureError { .. } => "quadrature_error",
            Error::TruncationError { .. } => "truncation_error",
            Error::StencilUnstable { .. } => "stencil_unstable",
            Error::Config(_) => "config",
        }
    }

    /// Whether the error stems from the inputs rather than from a numerical
    /// procedure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::EtaZero
                | Error::OutsidePhase { .. }
                | Error::AngleOutOfRange(_)
                | Error::OnBoundary
                | Error::Config(_)
        )
    }
}
