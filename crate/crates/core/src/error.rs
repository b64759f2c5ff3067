use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {reason} (estimate {estimate:e}, error {error:e})")]
    Quadrature { reason: String, estimate: f64, error: f64 },

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("precision error: {0}")]
    Precision(String),

    #[error("too close to the pole at {pole}: |s - pole| = {distance:e}")]
    Pole { pole: f64, distance: f64 },

    #[error("convergence error: {0}")]
    Convergence(String),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("root bracket error: {0}")]
    RootBracket(String),

    #[error("missing tail data: {0}")]
    MissingTail(String),

    #[error("kernel does not satisfy Condition H: {0}")]
    ConditionH(String),

    #[error("stability error: {0}")]
    Stability(String),

    #[error("Picard iteration failed to contract: {0}")]
    Contraction(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

impl Error {
    /// True for failures of a numerical method, as opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. }
                | Error::Estimation(_)
                | Error::Precision(_)
                | Error::Convergence(_)
                | Error::Bracket(_)
                | Error::RootBracket(_)
                | Error::Contraction(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
