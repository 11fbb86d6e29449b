use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("points are collinear within tolerance")]
    CollinearInput,

    #[error("dual arc point is not at unit distance from the wedge endpoints (residual {residual:e})")]
    BadDualArc { residual: f64 },

    #[error("Reuleaux polygons need an odd vertex count of at least 3, got {0}")]
    EvenOrTooSmallN(usize),

    #[error("no valid Reuleaux polygon after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("degenerate farthest-point Delaunay configuration: {0}")]
    DegenerateInput(String),

    #[error("farthest-point Voronoi adjacency is not a tree: {0}")]
    NotATree(String),

    #[error("disk of face {face} has radius {radius}, lift would be imaginary")]
    LiftImaginary { face: usize, radius: f64 },

    #[error("ball polyhedron is not standard at {witness:?}: {detail}")]
    NotStandard { witness: Vec<usize>, detail: String },

    #[error("duality map is not an involution at {witness:?}: {detail}")]
    NotInvolutive { witness: Vec<usize>, detail: String },

    #[error("metric embedding violated at {witness:?}: {detail}")]
    MetricEmbeddingViolation { witness: Vec<usize>, detail: String },

    #[error("edge {0} is paired with itself")]
    SelfDualEdge(usize),

    #[error("dual pair {pair} has both edges at the same height; give an explicit mask")]
    AmbiguousBottom { pair: usize },

    #[error("invalid surgery selection: {0}")]
    BadMask(String),

    #[error("mesh is not watertight: {0}")]
    NotWatertight(String),

    #[error("equality tolerance {0} outside (0, 1e-3)")]
    InvalidTolerance(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            return Error::Io(err.into());
        }
        Error::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
