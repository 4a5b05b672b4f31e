use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Messages lead with the error name so
/// the CLI can surface them verbatim.
#[derive(Debug, Error)]
pub enum Error {
    #[error("InvalidIndex: basis position {index} is out of range for dimension {dim}")]
    InvalidIndex { index: usize, dim: usize },

    #[error("DimMismatch: {context}: expected {expected}, found {found}")]
    DimMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("EmptyMixture: a mixture needs at least one term with positive weight")]
    EmptyMixture,

    #[error("InvalidWeight: {0}")]
    InvalidWeight(String),

    #[error("ZeroOperator: {0}")]
    ZeroOperator(&'static str),

    #[error("NonFinite: operator entries must be finite real numbers")]
    NonFinite,

    #[error("NotSymmetric: symmetry defect {defect:e} exceeds tolerance")]
    NotSymmetric { defect: f64 },

    #[error("NotPsd: minimum eigenvalue {min_eigenvalue:e} is below the clamp threshold")]
    NotPsd { min_eigenvalue: f64 },

    #[error("InvalidLabels: {0}")]
    InvalidLabels(String),

    #[error("NotSubnormalized: maximum eigenvalue {max_eigenvalue} exceeds 1")]
    NotSubnormalized { max_eigenvalue: f64 },

    #[error("CyclicTaxonomy: cycle {}", .cycle.join(" -> "))]
    CyclicTaxonomy { cycle: Vec<String> },

    #[error("ParseError: line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("UnknownWord: {0:?} is not a concept in the lexicon")]
    UnknownWord(String),

    #[error("AmbiguousWord: {word:?} appears in several lexicons ({})", .lexicons.join(", "))]
    AmbiguousWord { word: String, lexicons: Vec<String> },

    #[error("UnknownActor: {0:?} is not declared in the circuit")]
    UnknownActor(String),

    #[error("ZeroNegation: negating {word:?} under {config} yields the zero operator")]
    ZeroNegation { word: String, config: String },

    #[error("ZeroNegation: negation set {subset:?} requires negating {word:?}, which yields the zero operator")]
    ZeroNegationInSubset { word: String, subset: Vec<usize> },

    #[error("TooManyWords: {n} words is outside the supported range 1..={max}")]
    TooManyWords { n: usize, max: usize },

    #[error("AlignmentError: {0}")]
    Alignment(String),

    #[error("TooLarge: composite dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("EmptyState: the meaning of actor {0:?} collapsed to the zero operator")]
    EmptyState(String),

    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),

    #[error("IoError: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
