use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("decision log is empty")]
    EmptyLog,
    #[error("decision log needs at least 2 records of each class (found {negatives} negatives, {positives} positives)")]
    SingleClassLog { negatives: usize, positives: usize },
    #[error("record {index} has a non-finite score")]
    NonFiniteScore { index: usize },
    #[error("threshold {0} is not finite")]
    NonFiniteThreshold(f64),
    #[error("all class-{class} scores are identical; the binormal model does not apply")]
    ZeroVariance { class: u8 },
    #[error("invalid class priors (p_n={p_n}, p_p={p_p})")]
    InvalidPriors { p_n: f64, p_p: f64 },
    #[error("invalid binormal parameters: {0}")]
    InvalidFit(String),
    #[error("invalid loss matrix (l_fp={l_fp}, l_fn={l_fn}); both losses must be positive")]
    InvalidLosses { l_fp: f64, l_fn: f64 },
    #[error("invalid ROC curve: {0}")]
    InvalidRoc(String),
    #[error("tau {tau} lies outside the curve's threshold range [{min}, {max}]")]
    TauOutOfRange { tau: f64, min: f64, max: f64 },
    #[error("bandwidth must be positive and finite, got {0}")]
    InvalidBandwidth(f64),
    #[error("only {found} curve points in the window around tau={tau}; need at least 3")]
    InsufficientPoints { tau: f64, found: usize },
    #[error("FPR is flat around tau={tau}; the operating region carries no slope information")]
    FlatFprWindow { tau: f64 },
    #[error("no interior optimum: {0}")]
    NoInteriorOptimum(String),
    #[error("ROC slope must be positive, got {0}")]
    NonPositiveSlope(f64),
    #[error("agent actions are not a threshold rule of the scores ({violations} of {total} records violate the best split)")]
    InconsistentActions { violations: usize, total: usize },
    #[error("horizon {horizon} is not a positive multiple of dt={dt}")]
    InvalidHorizon { horizon: f64, dt: f64 },
    #[error("invalid simulation setting: {0}")]
    InvalidSimulation(String),
    #[error("action {u} at position {x} lies outside [0, {u_max}]")]
    ActionOutOfRange { x: f64, u: f64, u_max: f64 },
    #[error("differentiation stencil [{lo}, {hi}] leaves the action range [0, {u_max}]")]
    RangeViolation { lo: f64, hi: f64, u_max: f64 },
    #[error("speed is zero before arrival (position {x})")]
    DivisionByZeroSpeed { x: f64 },
    #[error("ethics trace is empty")]
    EmptyTrace,
    #[error("ethics trace vectors have inconsistent length or non-finite entries")]
    MalformedTrace,
    #[error("weight ratio needs exactly two risks, trace has {0}")]
    NotTwoRisks(usize),
    #[error("denominator {0:e} is below the 1e-12 guard")]
    DegenerateDenominator(f64),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
