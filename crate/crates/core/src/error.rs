use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge ({0}, {1}) is shared by more than two elements")]
    NonManifoldEdge(usize, usize),
    #[error("edge ({0}, {1}) is traversed in the same direction by two elements")]
    InconsistentOrientation(usize, usize),
    #[error("element {0}: vertex loop is self-intersecting")]
    SelfIntersecting(usize),
    #[error("element {0}: vertex loop is not counter-clockwise")]
    NotCounterClockwise(usize),
    #[error("element {0}: zero or negative area {1:e}")]
    ZeroArea(usize, f64),
    #[error("element {0}: vertex index {1} out of range")]
    VertexOutOfRange(usize, usize),
    #[error("element {0}: fewer than three distinct vertices")]
    TooFewVertices(usize),
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("mesh generation failed: {0}")]
    Generation(String),
    #[error("mesh format error at line {line}: {msg}")]
    MeshFormat { line: usize, msg: String },
    #[error("quadrature order {0} exceeds the supported maximum {1}")]
    QuadratureOrder(usize, usize),
    #[error("sigma_p is only defined on interior faces (face {0} is a boundary face)")]
    BoundaryFacePenalty(usize),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("eigenvalue problem failed: {0}")]
    Eigen(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            _ => 1,
        }
    }
}
