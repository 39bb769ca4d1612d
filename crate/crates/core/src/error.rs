use thiserror::Error;

/// Errors produced by density evaluation, sampling, simulation and verification.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (t ≤ 0, ℓ < 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The continuous density was requested exactly at y = 0 without a side.
    #[error("density at y = 0 is discontinuous; evaluate with an explicit side or the averaged variant")]
    InterfaceSide,

    /// Simulation parameters that are individually valid but incompatible.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Quadrature did not converge or the truncated tail is too heavy.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// A rejection loop hit its iteration cap.
    #[error("rejection sampler exceeded {cap} iterations ({context})")]
    IterationCap { cap: u64, context: String },

    /// Malformed verification or CLI configuration.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("elapsed time must be positive and finite, got {t}")))
    }
}

pub(crate) fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}
