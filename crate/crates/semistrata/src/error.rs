use thiserror::Error;

/// Failure modes shared by every module.
///
/// Variants are grouped by the exit code the command line front end maps
/// them to, see [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // input and schema problems
    #[error("schema error: {0}")]
    Schema(String),
    #[error("the residue characteristic must be odd (got p = {0})")]
    EvenPrime(u64),
    #[error("defining polynomial fails its tag check: {0}")]
    TagMismatch(String),
    #[error("invalid involution: {0}")]
    BadInvolution(String),
    #[error("basis is singular")]
    SingularBasis,
    #[error("lattice sequences have different periods")]
    PeriodMismatch,
    #[error("block projector is not compatible with the splitting basis")]
    BadBlock,
    #[error("element is not (skew-)self-adjoint")]
    NotSelfAdjoint,
    #[error("element is not skew")]
    NotSkew,
    #[error("forms live in different contexts")]
    ContextMismatch,
    #[error("invalid stratum: {0}")]
    InvalidStratum(String),
    #[error("operation expects a stratum of shape r = q - 1")]
    WrongShape,
    #[error("element is not an approximate idempotent")]
    NotApproxIdempotent,
    #[error("polynomial is not integral")]
    NotIntegral,
    #[error("bad defining sequence: {0}")]
    BadDefiningSequence(String),

    // unsupported
    #[error("extension is wildly ramified or inseparable")]
    WildExtension,
    #[error("unsupported context: {0}")]
    UnsupportedContext(String),
    #[error("trace pairing is degenerate")]
    DegenerateTracePairing,
    #[error("tame corestriction unavailable: wild or inseparable data")]
    WildOrInseparable,

    // undecided or numerical
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("iteration did not converge within its budget: {0}")]
    NonConvergence(String),
    #[error("could not normalize: {0}")]
    NormalizationFailed(String),
    #[error("undecided: {0}")]
    Undecided(String),

    // refuted or failed hypotheses
    #[error("division by zero")]
    DivisionByZero,
    #[error("polynomials are not coprime")]
    NotCoprime,
    #[error("case hypothesis failed: {0}")]
    CaseHypothesisFailed(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("double coset is not sigma-invariant")]
    CosetNotInvariant,
    #[error("characteristic polynomial is primary, nothing to split")]
    NotSplittable,
    #[error("characteristic polynomial is not primary")]
    NotPrimary,
    #[error("strata are not equivalent at the requested level")]
    NotEquivalentAtLevel,
    #[error("strata do not intertwine: {0}")]
    NotIntertwining(String),
    #[error("conjugacy condition fails: {0}")]
    ConditionFails(String),
    #[error("block forms are not isometric")]
    BlockFormsNotIsometric,
    #[error("no conjugator: {0}")]
    NoConjugator(String),
    #[error("not equivalent: {0}")]
    NotEquivalent(String),
    #[error("certificate rejected: {0}")]
    Rejected(String),
}

impl Error {
    /// Exit code for the command line contract: 2 input, 3 unsupported,
    /// 4 undecided, 5 refuted or failed.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Schema(_) | EvenPrime(_) | TagMismatch(_) | BadInvolution(_) | SingularBasis
            | PeriodMismatch | BadBlock | NotSelfAdjoint | NotSkew | ContextMismatch
            | InvalidStratum(_) | WrongShape | NotApproxIdempotent | NotIntegral
            | BadDefiningSequence(_) => 2,
            WildExtension | UnsupportedContext(_) | DegenerateTracePairing | WildOrInseparable => 3,
            PrecisionExhausted(_) | NonConvergence(_) | NormalizationFailed(_) | Undecided(_) => 4,
            _ => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
