use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(&'static str),
    #[error("atom {atom} has digit {digit}, expected 0, 1 or 2")]
    DigitOutOfRange { atom: usize, digit: u8 },
    #[error("expected {expected} atomic digits, got {found}")]
    DigitCount { expected: usize, found: usize },
    #[error("photon number {photons} exceeds truncation n_max = {n_max}")]
    PhotonOutOfRange { photons: usize, n_max: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid evolution spec: {0}")]
    InvalidSpec(&'static str),
    #[error(
        "integration failure: norm drift {drift:e} exceeds tolerance {tolerance:e} \
         at t = {time_reached} (step {step:e})"
    )]
    NormDrift {
        time_reached: f64,
        step: f64,
        drift: f64,
        tolerance: f64,
    },
    #[error("invalid drive parameters: {0}")]
    InvalidParams(&'static str),
    #[error("degenerate detuning: delta = delta2 - delta1 = 0")]
    DegenerateDetuning,
    #[error("operation requires uniform real couplings (g_j = g, Omega_j = Omega)")]
    NonUniform,
    #[error("{n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("excessive leakage from |{basis}>: survival amplitude {survival:.4} <= 0.5")]
    ExcessiveLeakage { basis: String, survival: f64 },
    #[error("matrix shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },
    #[error("invalid phase schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex {0} appears more than once")]
    DuplicateVertex(usize),
    #[error("entangling subset needs at least 2 vertices, got {0}")]
    SubsetTooSmall(usize),
    #[error("graph mismatch: {0}")]
    GraphMismatch(&'static str),
    #[error("local-complementation unitary failed verification at vertex {vertex}")]
    LcVerification { vertex: usize },
    #[error("too many vertices: {n} > {max}")]
    TooManyVertices { n: usize, max: usize },
    #[error("graph text, line {line}: {reason}")]
    GraphParse { line: usize, reason: &'static str },
}
