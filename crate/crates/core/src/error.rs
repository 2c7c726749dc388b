use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A family parameter is out of its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The offer distribution has `E[X+] = infinity` (e.g. Pareto/Frechet
    /// with `alpha <= 1`), so `phi` does not exist.
    #[error("offer tail is not integrable (E[X+] = infinity)")]
    TailNotIntegrable,

    /// The requested quantity needs `E[X+^2] < infinity` (Pareto/Frechet
    /// require `alpha > 2`).
    #[error("second moment is infinite for this distribution")]
    SecondMomentInfinite,

    /// `E[(X - mu0)+^p]` is infinite for the requested `p`.
    #[error("moment of order {p} is infinite for this distribution")]
    MomentInfinite { p: f64 },

    /// `E[exp(delta X+)]` is infinite for the requested `delta`.
    #[error("exponential moment at delta = {delta} is infinite")]
    MgfInfinite { delta: f64 },

    /// Argument outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The offer or residual distribution has no density.
    #[error("distribution has no density")]
    NoDensity,

    /// Policy samples are not strictly concave (not a valid optimal policy).
    #[error("policy samples are not strictly concave")]
    NotConcave,

    /// Policy samples are not strictly increasing.
    #[error("policy samples are not strictly increasing")]
    NotIncreasing,

    /// The arrival rate is below the estimated initial hazard `h(0+)`, so no
    /// offer distribution can produce these policy samples at this rate.
    #[error("rate {lambda} is below the estimated initial hazard h(0+) = {h0}")]
    RateTooSmall { lambda: f64, h0: f64 },

    /// Adaptive ODE integration drove the step size below the floor.
    #[error("ODE step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    /// A value-level asymptotic was requested where only a regular-variation
    /// exponent is known (power-law class).
    #[error("only a regular-variation exponent is available for this tail class")]
    NotApplicable,

    /// Tail classification is only available for built-in families.
    #[error("tail class unknown for tabulated models; use the regular-variation diagnostic")]
    UnknownTail,

    /// The regular-variation diagnostic hit a non-positive function value.
    #[error("function value is not positive at probe point t = {t}")]
    NonPositiveValue { t: f64 },

    /// Too few samples to compare CDFs.
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },

    /// Summary statistics of an empty batch were requested.
    #[error("empty simulation batch")]
    EmptyBatch,

    /// Unrecognized figure id.
    #[error("unknown figure id {0:?} (expected one of f2..f7)")]
    UnknownFigure(String),

    /// Malformed tabulated-CDF or policy-sample data.
    #[error("invalid input data: {0}")]
    InvalidData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
