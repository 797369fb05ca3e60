use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("local dimension must be at least 2, got {0}")]
    Dimension(usize),

    #[error("matrix side {side} does not match subsystem dimensions {dims:?}")]
    ShapeMismatch { side: usize, dims: Vec<usize> },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("permutation {0:?} is not a permutation of the subsystem indices")]
    BadPermutation(Vec<usize>),

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemIndex { index: usize, count: usize },

    #[error("partial trace must keep at least one subsystem")]
    EmptyKeep,

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("expected unit trace, got {0}")]
    TraceNotUnit(f64),

    #[error("Werner parameter must lie in [0, 1], got {0}")]
    WernerParameter(f64),

    #[error("lambda entries must be nonnegative, got {0:?}")]
    NegativeWeight([f64; 4]),

    #[error("lambda must sum to 1, got sum {0}")]
    Unnormalized(f64),

    #[error("witness index must be 1, 2 or 3, got {0}")]
    WitnessIndex(usize),

    #[error("product vector factor has zero norm")]
    ZeroVector,

    #[error("map annihilates the input (output trace {0:.3e})")]
    Annihilated(f64),

    #[error("point set is degenerate: {0}")]
    Degenerate(String),

    #[error("dimension {0} is above the supported limit {1}")]
    DimensionTooLarge(usize, usize),

    #[error("sample count must be at least 1")]
    NoSamples,
}
