//! Crate-wide error type.

use thiserror::Error;

/// Errors reported by the numerical operations in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// The integrand produced a NaN; the abscissa is in original coordinates.
    #[error("integrand returned NaN at x = {abscissa}")]
    NanIntegrand { abscissa: f64 },

    /// Malformed integration interval.
    #[error("invalid integration interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    /// A quantity that must converge did not (quadrature or truncation scan).
    #[error("no convergence in {context}")]
    NonConvergence { context: String },

    /// Semi-infinite truncation scan found no decay before the internal cap.
    #[error("no decay detected on [{lo}, oo) after scanning to {reached}")]
    NoDecay { lo: f64, reached: f64 },

    /// Evaluation requested at a point where the formula is singular.
    #[error("singular point: {what}")]
    SingularPoint { what: String },

    /// Operation outside its supported parameter range.
    #[error("unsupported: {what}")]
    Unsupported { what: String },

    /// Input violates a documented precondition.
    #[error("precondition violated: {what}")]
    Precondition { what: String },

    /// Spectral point too close to the support boundary for a stable evaluation.
    #[error("point ({rho}, {tau}) within relative distance {rel} of the support boundary")]
    BoundaryTooClose { rho: f64, tau: f64, rel: f64 },

    /// Lorentz boost parameter outside (-1, 1).
    #[error("boost rapidity parameter |t| >= 1: t = {t}")]
    BoostOutOfRange { t: f64 },

    /// Degenerate input (e.g. zero denominator in a quotient).
    #[error("degenerate input: {what}")]
    DegenerateInput { what: String },

    /// Two internal evaluation routes disagreed beyond tolerance.
    #[error("internal inconsistency: {what}")]
    InternalInconsistency { what: String },

    /// The (u, v) change of variables failed its injectivity/Jacobian check.
    #[error("singular change of variables: {what}")]
    SingularMap { what: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
