use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("unknown catalog domain `{0}`")]
    UnknownDomain(String),

    #[error("triangulation failed: {0}")]
    Triangulation(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("degenerate triangle {0} (zero or negative area)")]
    DegenerateTriangle(usize),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("mesh has no interior node; refine before imposing Dirichlet conditions")]
    NoInteriorNodes,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("factorization breakdown at pivot {0}; the shift is (numerically) an eigenvalue")]
    FactorizationBreakdown(usize),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("eigenvalue window insufficient: {0}")]
    InsufficientWindow(String),

    #[error("not an eigenpair: relative residual {0:e}")]
    NotAnEigenpair(f64),

    #[error("boundary operator: {0}")]
    BoundaryOperator(String),

    #[error("pairing for `{0}` does not factor through L2 of the boundary and cannot be discretized")]
    UnverifiablePairing(String),

    #[error("boundary operator is not self-adjoint: {0}")]
    NotSelfAdjoint(String),

    #[error("malformed boundary operator spec `{spec}`: {msg}")]
    SpecSyntax { spec: String, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("trial space degenerate: {0}")]
    TrialSpaceDegenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
