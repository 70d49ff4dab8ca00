use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported exponent pair ({0}, {1})")]
    UnsupportedExponent(u32, u32),

    #[error("non-finite evaluation of the nonlinearity at {0:?}")]
    Evaluation([f64; 4]),

    #[error("curve undefined: {0}")]
    UndefinedCurve(String),

    #[error("resonance: omega1/omega2 = {ratio} is within tolerance of {i}:{j}")]
    Resonance { ratio: f64, i: u32, j: u32 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("degenerate eigenbasis: {0}")]
    DegenerateEigenbasis(String),

    #[error("singular solve at mode {mode}, sigma = {sigma_re}{sigma_im:+}i")]
    SingularSolve { mode: usize, sigma_re: f64, sigma_im: f64 },

    #[error("near-resonant denominator in {0}")]
    NearResonance(String),

    #[error("degenerate cubic coefficient: {0}")]
    DegenerateCubic(String),

    #[error("degenerate classification: {0} is within tolerance of zero")]
    DegenerateClassification(String),

    #[error("state left the model domain at t = {t} (node {node})")]
    StateDomain { t: f64, node: usize },

    #[error("simulation diverged; last valid time t = {t}")]
    Divergence { t: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("model file: {0}")]
    Parse(String),
}
