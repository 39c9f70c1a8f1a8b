use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for a {num_qubits}-qubit register")]
    IndexOutOfRange { qubit: usize, num_qubits: usize },
    #[error("{gate} expects {expected} qubit(s), got {got}")]
    ArityMismatch {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("duplicate qubit index {0} in a single gate")]
    DuplicateQubit(usize),
    #[error("gate {0} follows a measurement; only a terminal measurement layer is allowed")]
    MidCircuitMeasurement(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("multi-controlled X with {controls} controls needs {needed} ancillae, got {got}")]
    InsufficientAncilla {
        controls: usize,
        needed: usize,
        got: usize,
    },
    #[error("qubit {0} used more than once across controls, target and ancillae")]
    IndexCollision(usize),
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("observable is not Hermitian")]
    NonHermitianObservable,
    #[error("{n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },
    #[error("dimension {0} is not a power of two")]
    NonPowerOfTwo(usize),
    #[error("TTN ansatz requires a power-of-two qubit count, got {0}")]
    TtnRequiresPowerOfTwo(usize),
    #[error("input vector has zero norm")]
    ZeroVector,
    #[error("periodic source must have zero mean, got mean {0}")]
    NotMeanZero(f64),
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("degenerate A expectation {0:e}: state lies in or near the operator nullspace")]
    DegenerateA(f64),
    #[error("gate {0} has no controlled form")]
    UnsupportedGate(String),
    #[error("multi-controlled X must be expanded before basis decomposition")]
    UnexpandedMcx,
    #[error("circuit needs {needed} physical qubits, coupling map has {available}")]
    NotEnoughPhysicalQubits { needed: usize, available: usize },
    #[error("unknown noise profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
