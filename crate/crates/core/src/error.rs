use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("polynomial mixes even and odd degrees")]
    MixedParity,
    #[error("polynomial is not divisible by the quadric (relative residual {residual:.3e})")]
    NotDivisible { residual: f64 },
    #[error("quadratic form is degenerate (|det B| = {det:.3e})")]
    Degenerate { det: f64 },
    #[error("quadrature exact to degree {available} but degree {required} is needed")]
    InsufficientQuadrature { required: usize, available: usize },
    #[error("binary form vanishes identically")]
    ZeroForm,
    #[error("point is not on the conic (residual {residual:.3e})")]
    NotOnConic { residual: f64 },
    #[error("linear solve failed (relative residual {residual:.3e})")]
    SolveFailure { residual: f64 },
    #[error("multiplicities sum to the odd total {total}")]
    OddTotal { total: usize },
    #[error("polynomial is divisible by the quadric")]
    DivisibleByQ,
    #[error("no admissible evaluation point found on the conic")]
    NoEvaluationPoint,
    #[error("input is not real (max imaginary part {imag:.3e})")]
    NotReal { imag: f64 },
    #[error("quadratic form is not real definite")]
    NotDefinite,
    #[error("no conjugate partner found for root cluster {cluster}")]
    ConjugationPairingFailure { cluster: usize },
    #[error("zero direction vector")]
    ZeroVector,
    #[error("polynomial is not harmonic (relative residual {residual:.3e})")]
    NotHarmonic { residual: f64 },
    #[error("polar line is tangent to the conic")]
    DegenerateTangency,
    #[error("strategy does not apply: {0}")]
    StrategyMismatch(&'static str),
    #[error("invalid partition: {0}")]
    InvalidPartition(&'static str),
    #[error("enumeration exceeds {limit} representations")]
    TooManyRepresentations { limit: usize },
    #[error("parcelling does not match the root clusters of the polynomial")]
    ParcellingMismatch,
    #[error("pencil center lies on the conic")]
    CenterOnConic,
}

pub type Result<T> = std::result::Result<T, Error>;
