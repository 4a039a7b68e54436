use thiserror::Error;

/// Errors raised by the string evolution pipeline and its oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown curve preset `{0}`")]
    UnknownPreset(String),
    #[error("empty coefficient array for component {component}")]
    EmptyCoefficients { component: usize },
    #[error("coefficient arrays disagree: {0}")]
    CoefficientMismatch(String),
    #[error("period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("ambient dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("{field} is not periodic: mismatch {mismatch:e} between 0 and L")]
    NotPeriodic { field: &'static str, mismatch: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate immersion at theta = {theta}: |p'| = {speed:e}")]
    DegenerateImmersion { theta: f64, speed: f64 },
    #[error("space-like point at theta = {theta}: discriminant = {discriminant:e}")]
    SpaceLike { theta: f64, discriminant: f64 },
    #[error("characteristic gap collapsed at theta = {theta}: gap = {gap:e}")]
    GapCollapse { theta: f64, gap: f64 },
    #[error("singular induced metric: det = {det:e}")]
    SingularMetric { det: f64 },

    #[error("table is not strictly increasing at node {index}")]
    NonMonotone { index: usize },
    #[error("{value} lies outside the tabulated domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("root not bracketed: {0}")]
    RootNotBracketed(String),
    #[error("finite-difference step too small: residual grew from {coarse:e} to {fine:e} under refinement")]
    StepTooSmall { coarse: f64, fine: f64 },

    #[error("need at least {needed} states, got {got}")]
    TooFewStates { needed: usize, got: usize },
    #[error("time levels are not uniformly spaced")]
    NonUniformTimes,
    #[error("states do not share output times")]
    MismatchedTimes,
    #[error("states do not share a parameter grid")]
    MismatchedGrids,

    #[error("CFL number {cfl} exceeds {limit} after {halvings} step halvings")]
    CflViolation {
        cfl: f64,
        limit: f64,
        halvings: usize,
    },
    #[error(
        "space-like degeneration at t = {t}, theta = {theta}: discriminant = {discriminant:e}"
    )]
    Degeneration {
        t: f64,
        theta: f64,
        discriminant: f64,
    },
    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
