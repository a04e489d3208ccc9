use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degenerate level-set gradient (|grad phi| = {0:e})")]
    DegenerateGradient(f64),

    #[error("geometry has no parameterization for sampling")]
    UnsupportedGeometry,

    #[error("grid alignment mismatch: {0}")]
    AlignmentMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grids are not nested: coarse n = {coarse}, fine n = {fine}")]
    NotNested { coarse: usize, fine: usize },

    #[error("expression error: {0}")]
    Expr(String),

    #[error("malformed network file: {0}")]
    NetFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
