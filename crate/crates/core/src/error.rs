use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("zero quaternion has no axis-angle decomposition")]
    ZeroQuaternion,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("non-manifold edge ({0}, {1})")]
    NonManifold(usize, usize),

    #[error("degenerate (zero-area) face {0}")]
    DegenerateFace(usize),

    #[error("degenerate vertex area at vertex {0}")]
    DegenerateVertex(usize),

    #[error("edge {0} is a boundary edge")]
    BoundaryEdge(usize),

    #[error("edge {0} is folded (dihedral angle of pi)")]
    FoldedEdge(usize),

    #[error("meshes do not share connectivity")]
    ConnectivityMismatch,

    #[error("point set is empty")]
    EmptyPointSet,

    #[error("topology error: {0}")]
    Topology(String),

    #[error("{0} flipped triangles in parameter domain")]
    Flip(usize),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("bad magic in tensor file")]
    BadMagic,

    #[error("unsupported tensor file version {0}")]
    UnsupportedVersion(u32),

    #[error("tensor payload truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("tensor dimensions overflow")]
    DimOverflow,

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
