use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown builtin model `{0}`")]
    UnknownBuiltin(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error("expression `{expr}`: {msg}")]
    Expr { expr: String, msg: String },

    #[error("table `{path}`: {msg}")]
    Table { path: String, msg: String },

    #[error("w2 is not symmetric: |w2(x,y) - w2(y,x)| = {deviation:e} at x = {x:?}, y = {y:?}")]
    AsymmetricW2 {
        deviation: f64,
        x: Vec<f64>,
        y: Vec<f64>,
    },

    #[error("non-finite value of {function} at {point:?}")]
    NonFinite {
        function: &'static str,
        point: Vec<f64>,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("z = {z} lies within {gap:e} of w2 at node {node}: z is inside the sampled range of w2")]
    PoleProximity { z: f64, node: usize, gap: f64 },

    #[error(
        "Delta(x_{node}; {z}) = {value} is not positive: z is not strictly below the essential spectrum (or Assumption A fails)"
    )]
    NonPositiveDelta { z: f64, node: usize, value: f64 },

    #[error("spectral parameter z = {z} is not below min w2 on the grid ({m})")]
    NotBelowRange { z: f64, m: f64 },

    #[error("matrix is not finite or not square: {0}")]
    Eigen(String),

    #[error("root search window [{z_lo}, {z_hi}] does not bracket the Sigma_2 root at node {node}; widen the window")]
    SearchWindow { z_lo: f64, z_hi: f64, node: usize },

    #[error("at least {need} refinement levels are required, got {got}")]
    TooFewLevels { need: usize, got: usize },

    #[error("singular sequence support escapes the domain: {0}")]
    SupportEscapes(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
