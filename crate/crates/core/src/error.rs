use thiserror::Error;

/// Errors raised by graph construction, operators and the verification reports.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex index {index} out of range for a graph with {vertex_count} vertices")]
    IndexOutOfRange { index: usize, vertex_count: usize },

    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    DisconnectedGraph(usize),

    #[error("vertex {0} has zero mass")]
    ZeroMassVertex(usize),

    #[error("negative weight {weight} on ({x}, {y})")]
    NegativeWeight { x: usize, y: usize, weight: f64 },

    #[error("asymmetric input: ({x}, {y}) given with weights {forward} and {backward}")]
    AsymmetricInput { x: usize, y: usize, forward: f64, backward: f64 },

    #[error("graph has {requested} vertices, above the dense cap of {cap}")]
    SizeOverflow { requested: usize, cap: usize },

    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),

    #[error("empty sample")]
    EmptySample,

    #[error("({0}, {1}) is not an edge")]
    NotAnEdge(usize, usize),

    #[error("function does not belong to this graph")]
    GraphMismatch,

    #[error("edge function is not antisymmetric on ({0}, {1})")]
    NotAntisymmetric(usize, usize),

    #[error("symmetric eigensolver did not converge")]
    EigensolverFailure,

    #[error("spectral function is infinite at occupied eigenvalue {0}")]
    SingularFunction(f64),

    #[error("function is not orthogonal to constants (mean {0})")]
    NotMeanZero(f64),

    #[error("quadrature under-resolved: estimated error {estimate:e} above tolerance {tolerance:e}")]
    QuadratureUnderResolved { estimate: f64, tolerance: f64 },

    #[error("series tail could not be certified below {0:e}")]
    TailNotCertified(f64),

    #[error("bad set is empty")]
    EmptyOmega,

    #[error("bad set is the whole graph; the complement must be nonempty")]
    OmegaIsEverything,

    #[error("cover does not cover vertex {0} of the bad set")]
    CoverDoesNotCover(usize),

    #[error("t = {t} outside (0, {total}]")]
    TOutOfRange { t: f64, total: f64 },

    #[error("descent diverged: objective {0} is not finite")]
    DescentDiverged(f64),

    #[error("gradient form vanishes on a nonconstant function of the ball")]
    DegenerateBall,

    #[error("strategy {0} is not supported for this exponent")]
    StrategyUnsupported(String),

    #[error("no interior vertices at margin {0}")]
    NoInteriorVertices(usize),

    #[error("annulus C_{0}(B) is empty")]
    EmptyAnnulus(u32),

    #[error("linear system is singular or the solver stalled (residual {0:e})")]
    SingularSystem(f64),

    #[error("ball has empty interior")]
    EmptyInterior,

    #[error("ball of radius {radius} too large: inflated ball at radius {needed} leaves the graph")]
    BallTooLarge { radius: usize, needed: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
