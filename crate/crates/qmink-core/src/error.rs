use thiserror::Error;

#[derive(Debug, Error)]
pub enum QminkError {
    #[error("singular matrix")]
    SingularMatrix,
    #[error("matrix has NaN or infinite entries")]
    NonFinite,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("structure inconsistency: {0}")]
    StructureInconsistent(String),
    #[error("pivot failure while building the rewrite table: {0}")]
    PivotFailure(String),
    #[error("rewrite loop exceeded the iteration cap on word {0:?}")]
    NonTermination(Vec<u8>),
    #[error("quadratic momentum element is not scalar on the interior (max off-scalar {0:.3e})")]
    NotScalar(f64),
    #[error("negative mass square: {0}")]
    NegativeMassSquare(f64),
    #[error("tachyonic momentum: mass square {0} < 0")]
    TachyonicMomentum(f64),
    #[error("unsupported case: {0}")]
    UnsupportedCase(String),
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
}
