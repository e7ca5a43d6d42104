use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("labels and values differ in length ({labels} labels, {values} values)")]
    LengthMismatch { labels: usize, values: usize },

    #[error("non-finite value {value} at position {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("negative probability {value} for label `{label}`")]
    NegativeProb { label: String, value: f64 },

    #[error("probabilities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("need at least 2 atoms, got {0}")]
    TooFewAtoms(usize),

    #[error("negative count {value} for label `{label}`")]
    NegativeCount { label: String, value: f64 },

    #[error("all counts are zero")]
    AllZeroCounts,

    #[error("label sets differ")]
    LabelMismatch,

    #[error("usage puts mass on `{0}` where the source probability is zero")]
    SupportMismatch(String),

    #[error("absolute continuity violated at `{0}`: U > 0 where P = 0")]
    SupportViolation(String),

    #[error("importance coefficient must be finite, got {0}")]
    NonFiniteOmega(f64),

    #[error("degenerate distribution: {0}")]
    DegeneratePmf(&'static str),

    #[error("beta {beta} outside the open feasible interval ({beta_min}, {beta_max})")]
    BetaOutOfRange { beta: f64, beta_min: f64, beta_max: f64 },

    #[error("budget {beta} below the smallest reachable value {beta_min}")]
    InfeasibleBudget { beta: f64, beta_min: f64 },

    #[error("bisection did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("alphabet of size {size} exceeds the cap of {cap}")]
    AlphabetTooLarge { size: usize, cap: usize },

    #[error("grid step {0} outside [1e-4, 1e-1]")]
    InvalidGridStep(f64),

    #[error("simplex lattice with {points} points exceeds the cap of {cap}")]
    GridTooFine { points: u128, cap: u128 },

    #[error("no lattice point satisfies the constraint")]
    NoFeasiblePoint,

    #[error("seed violates the constraint (sum P*U = {value}, budget {beta})")]
    InfeasibleSeed { value: f64, beta: f64 },

    #[error("enumeration too large: alphabet {alphabet} (cap {alphabet_cap}), n {n} (cap {n_cap})")]
    TooLarge {
        alphabet: usize,
        alphabet_cap: usize,
        n: usize,
        n_cap: usize,
    },

    #[error("sequence length must be at least 1")]
    ZeroLength,

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by malformed or invalid input data, as opposed
    /// to requests outside the mathematical domain of an operation.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::LengthMismatch { .. }
                | Error::NonFinite { .. }
                | Error::NegativeProb { .. }
                | Error::NotNormalized { .. }
                | Error::DuplicateLabel(_)
                | Error::TooFewAtoms(_)
                | Error::NegativeCount { .. }
                | Error::AllZeroCounts
                | Error::LabelMismatch
                | Error::SupportMismatch(_)
                | Error::SupportViolation(_)
                | Error::NonFiniteOmega(_)
                | Error::ZeroLength
                | Error::Parse(_)
        )
    }
}
