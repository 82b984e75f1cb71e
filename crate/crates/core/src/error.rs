use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain length {length} is not an integer number of cells of width {dx}")]
    NonIntegerCellCount { length: f64, dx: f64 },
    #[error("cell width must satisfy 0 < dx < 1, got {0}")]
    InvalidCellWidth(f64),
    #[error("invalid domain: x_max ({x_max}) must exceed x_min ({x_min})")]
    InvalidDomain { x_min: f64, x_max: f64 },
    #[error("velocity bound is zero; no admissible time step")]
    DegenerateVelocity,
    #[error("kernel range {range} is not an integer multiple of dx = {dx}")]
    RangeNotMultipleOfDx { range: f64, dx: f64 },
    #[error("kernel range {range} is smaller than one cell ({dx})")]
    RangeTooSmall { range: f64, dx: f64 },
    #[error("kernel stencil ({stencil} cells) is wider than the domain ({cells} cells)")]
    KernelWiderThanDomain { stencil: usize, cells: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("lane index {index} out of range for {lanes} lanes")]
    LaneIndexOutOfRange { index: usize, lanes: usize },
    #[error("initial profile leaves [0, 1]: value {value} at x = {x}")]
    ProfileOutOfRange { x: f64, value: f64 },
    #[error("time step {dt} violates the CFL bound (lambda * V = {courant} > {cap})")]
    CflViolation { dt: f64, courant: f64, cap: f64 },
    #[error("density {value} left [0, 1] in lane {lane}, cell {cell} during the {phase} step")]
    RangeViolation {
        lane: usize,
        cell: usize,
        value: f64,
        phase: &'static str,
    },
    #[error("snapshot time {t} outside [0, {t_final}]")]
    SnapshotTimeOutOfRange { t: f64, t_final: f64 },
    #[error("states do not belong to one solver step: {0}")]
    StateMismatch(String),
    #[error("snapshots live on different grids")]
    GridMismatch,
    #[error("schema error at `{path}`: {message}")]
    SchemaError { path: String, message: String },
    #[error("invalid configuration: {0}")]
    SemanticError(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
