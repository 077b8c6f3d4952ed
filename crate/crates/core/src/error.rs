use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ball size exceeded cap of {cap} vertices (radius {radius})")]
    BallCapExceeded { cap: usize, radius: u32 },

    #[error("vertex {0} not present in graph")]
    UnknownVertex(String),

    #[error("generators do not generate the group: {0} not reached within radius {1}")]
    GenerationWitness(String, u32),

    #[error("generating set is degenerate: all elements collinear with {0}")]
    DegenerateSet(String),

    #[error("word norm of {0} exceeds radius cap {1}")]
    RadiusCapExceeded(String, u32),

    #[error("no plane-lattice quotient available for this group spec")]
    NoQuotient,

    #[error("seed set is not {0}-separated: witnesses {1} and {2}")]
    SeedNotSeparated(u32, String, String),

    #[error("fiber over {0} contains no window vertex")]
    EmptyFiber(String),

    #[error("quasi-isometry witness failed for pair ({0}, {1}): {2}")]
    QiWitnessFailure(String, String, String),

    #[error("graph too large for this operation: {0} vertices (guard {1})")]
    SizeGuard(usize, usize),

    #[error("region margin insufficient: need distance >= {need} from the window boundary, have {have}")]
    InsufficientMargin { need: u32, have: u32 },

    #[error("block-scale relation violated: expected a = ceil(n/(4C)) = {expected}, net has a = {got}")]
    BlockScaleRelation { expected: u32, got: u32 },

    #[error("laws live on different vertex sets: {0} vs {1} vertices")]
    VertexSetMismatch(usize, usize),

    #[error("exploration horizon {0} exceeds guard {1}")]
    HorizonGuard(u32, u32),

    #[error("lift extension failed at base vertex {0}: no unrevealed source neighbor maps onto it")]
    LiftExtensionFailure(String),

    #[error("growth signal is not polynomial: slope drift {0:.3} between window halves")]
    NonPolynomialGrowth(f64),

    #[error("spanning probability not monotone-bracketed; raw curve: {0:?}")]
    NonMonotoneSpanning(Vec<(f64, f64)>),

    #[error("adversary family is empty")]
    EmptyFamily,

    #[error("dependency certification failed: {0}")]
    CertificationFailure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
