//! Error type shared by every module of the crate.
//!
//! Errors are split into two classes that the command-line front end maps to
//! distinct exit codes: *validation* errors (the caller asked for something
//! outside a precondition) and *numerical* errors (a computation that was
//! well-posed failed to converge, hit a singularity, or was stopped).

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SleError>;

/// All failure modes of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SleError {
    /// A numeric parameter violated a documented range.
    #[error("{what} = {value} is out of range: {reason}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        reason: String,
    },
    /// Generic malformed input (wrong lengths, unparsable specs, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A truncated series did not reach its tolerance within the term budget.
    #[error("{what}: series did not converge within {terms} terms")]
    NonConvergent { what: &'static str, terms: usize },
    /// Evaluation requested within the pole guard of a lattice point.
    #[error("argument {re} + {im}i lies within the pole guard of a lattice point")]
    PoleProximity { re: f64, im: f64 },
    /// Two points that must be distinct (or a point and a reflection) coincide.
    #[error("coincident points: {0}")]
    CoincidentPoints(String),
    /// Charges of a divisor do not sum to zero.
    #[error("neutrality violated: total charge {total}")]
    NeutralityViolation { total: f64 },
    /// A boundary point carries both a holomorphic and an anti-holomorphic charge.
    #[error("boundary point #{index} carries sigma*sigma_star != 0 and needs renormalization")]
    BoundaryRenormalizationRequired { index: usize },
    /// Too many points for the pairing expansion.
    #[error("{n} points exceed the supported maximum of {max}")]
    TooManyPoints { n: usize, max: usize },
    /// Force-point configuration outside the supported geometry.
    #[error("unsupported force configuration: {0}")]
    UnsupportedForce(String),
    /// Continuous argument tracking met a zero of the tracked function.
    #[error("argument continuation failed: {0}")]
    BranchTracking(String),
    /// Screening normalisation evaluated at a pole in kappa.
    #[error("normalization constant has a pole at kappa = {kappa}")]
    PoleAtKappa { kappa: f64 },
    /// Screening integrand evaluated on its branch cut.
    #[error("screening variable on the branch cut: {0}")]
    BranchCut(String),
    /// Tanh-sinh quadrature did not reach its tolerance.
    #[error("quadrature did not converge (last level {level}, change {change:e})")]
    QuadratureNonConvergent { level: usize, change: f64 },
    /// Kappa outside the range of a particular evaluator.
    #[error("kappa = {kappa} not supported: {reason}")]
    KappaOutOfRange { kappa: f64, reason: String },
    /// Residue evaluator requires 4/kappa to be a small positive integer.
    #[error("kappa = {kappa} is not a residue case (4/kappa must be 1, 2, 3 or 4)")]
    KappaNotResidueCase { kappa: f64 },
    /// Closed-form tables only cover kappa in {4, 2, 4/3, 1}.
    #[error("kappa = {kappa} is not tabulated (closed forms exist for 4, 2, 4/3, 1)")]
    KappaNotTabulated { kappa: f64 },
    /// Hypergeometric series failed to converge.
    #[error("hypergeometric series did not converge")]
    HypergeometricNonConvergent,
    /// A tracked point entered the swallow guard zone.
    #[error("tracked point '{label}' swallowed at t = {t}")]
    Swallowed { label: String, t: f64 },
    /// A force point met the driving function.
    #[error("force point #{index} swallowed at t = {t}")]
    ForcePointSwallowed { index: usize, t: f64 },
    /// The reverse Loewner flow left the strip or blew up.
    #[error("reverse flow diverged: {0}")]
    ReverseFlowDiverged(String),
    /// An observable was requested for a point that is no longer available.
    #[error("evaluation point '{0}' has been swallowed")]
    PointSwallowed(String),
    /// Too many Monte Carlo paths stopped before the horizon.
    #[error("{stopped} of {total} paths stopped early (more than 10%)")]
    TooManySwallowed { stopped: usize, total: usize },
    /// Input/output failure in the command-line layer.
    #[error("i/o error: {0}")]
    Io(String),
}

impl SleError {
    /// True when the error reflects a violated precondition rather than a
    /// numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            SleError::OutOfRange { .. }
                | SleError::InvalidInput(_)
                | SleError::CoincidentPoints(_)
                | SleError::NeutralityViolation { .. }
                | SleError::BoundaryRenormalizationRequired { .. }
                | SleError::TooManyPoints { .. }
                | SleError::UnsupportedForce(_)
                | SleError::PoleAtKappa { .. }
                | SleError::BranchCut(_)
                | SleError::KappaOutOfRange { .. }
                | SleError::KappaNotResidueCase { .. }
                | SleError::KappaNotTabulated { .. }
                | SleError::Io(_)
        )
    }
}

impl From<std::io::Error> for SleError {
    fn from(e: std::io::Error) -> Self {
        SleError::Io(e.to_string())
    }
}
