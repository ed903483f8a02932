//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by construction, evaluation, and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    /// Model parameters violate a validity constraint.
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    /// The metric is singular at the given point (a(x) = 0).
    #[error("singular metric at x = {x}: a(x) = 0")]
    SingularMetric { x: f64 },

    /// Evaluation point lies outside the open domain (x_minus, x_plus).
    #[error("x = {x} outside domain ({lo}, {hi})")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    /// No root of g00 was found in the scan window.
    #[error("boundary not found: {0}")]
    BoundaryNotFound(String),

    /// Profile family constants cannot satisfy the model constraints.
    #[error("unsatisfiable constraint: {0}")]
    Constraint(String),

    /// Origin matching requires epsilon * eta != 0.
    #[error("origin matching singular: epsilon * eta = 0")]
    MatchingSingular,

    /// E = epsilon + i eta vanishes; component ratios are undefined.
    #[error("degenerate energy: epsilon + i eta = 0")]
    DegenerateEnergy,

    /// Operation requires a different profile family.
    #[error("unsupported profile family: expected {expected}")]
    UnsupportedFamily { expected: &'static str },

    /// Kummer parameter b is at or near a non-positive integer pole.
    #[error("kummer pole: b = {b} is a non-positive integer")]
    KummerPole { b: String },

    /// Series failed to converge within the term budget.
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },

    /// Kinetic-balance denominator vanishes at the evaluation point.
    #[error("kinetic balance singular at y = {y}")]
    KineticBalanceSingular { y: f64 },

    /// The interacting closed form requires V0 = +/- eta / 2.
    #[error("closed form unavailable: {0}")]
    ClosedFormUnavailable(String),

    /// ODE integration produced a non-finite state.
    #[error("integration blow-up at t = {t}")]
    BlowUp { t: f64 },

    /// Quadrature exceeded its refinement depth without meeting tolerance.
    #[error("quadrature accuracy failure: {0}")]
    Accuracy(String),

    /// Double-integration hit a zero of g(a) inside the requested range.
    #[error("turning point at a = {a}: g(a) = 0")]
    TurningPoint { a: f64 },

    /// Invalid run configuration (CLI or JSON).
    #[error("config error: {0}")]
    Config(String),

    /// I/O failure while reading config or writing output.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for configuration errors, 3 for
    /// numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 3,
        }
    }
}
