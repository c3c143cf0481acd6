use thiserror::Error;

/// Errors raised by the exact and p-adic computations of this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision {0} is below the minimum of {min}", min = crate::padic::MIN_PRECISION)]
    PrecisionTooLow(u32),
    #[error("zero input")]
    ZeroInput,
    #[error("a symmetric ball cannot contain zero")]
    ZeroValue,
    #[error("not a square in Q_p")]
    NotASquare,
    #[error("p-adic precision exhausted ({digits} digits)")]
    PrecisionExhausted { digits: u32 },
    #[error("singular matrix")]
    SingularMatrix,
    #[error("matrix does not preserve the quadratic form")]
    NotInSOQ,
    #[error("M(v0) has vanishing first coordinate; outside the N-H chart")]
    ChartFailure,
    #[error("zero vector")]
    ZeroVector,
    #[error("zero coordinate")]
    ZeroCoordinate,
    #[error("zero denominator in cross-ratio")]
    ZeroDenominator,
    #[error("square class {0} contains -1 and does not define a disc")]
    NotAdmissible(String),
    #[error("vector is not in the disc")]
    NotInDisc,
    #[error("the two points coincide")]
    SamePoint,
    #[error("the two points span a short line")]
    NotLongLine,
    #[error("closed-form distance requires an odd prime")]
    OddPOnly,
    #[error("direction is not orthogonal to the base point")]
    NotInPerp,
    #[error("degenerate circle radius")]
    DegenerateRadii,
    #[error("tree projection requires a class of even valuation")]
    OddValuationAlpha,
    #[error("singular lattice basis")]
    SingularBasis,
    #[error("boundary points coincide")]
    EqualBoundaryPoints,
    #[error("points belong to different discs")]
    AlphaMismatch,
    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
