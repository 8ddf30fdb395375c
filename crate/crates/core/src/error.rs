use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown atom `{0}`")]
    UnknownAtom(String),

    #[error("unknown agent `{0}`")]
    UnknownAgent(String),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid action model: {0}")]
    InvalidActionModel(String),

    #[error("malformed JSON: {0}")]
    Json(String),

    #[error("none of the designated actions {actions:?} is applicable to the model pointed at `{point}`")]
    NoApplicableDesignatedAction { point: String, actions: Vec<String> },

    #[error("designated actions {actions:?} are all applicable to the model pointed at `{point}`")]
    MultipleApplicableDesignatedActions { point: String, actions: Vec<String> },

    #[error("action model rejected in strict mode: {0}")]
    StrictRejected(String),

    #[error("at step {step}: {inner}")]
    Step { step: usize, inner: Box<Error> },

    #[error("invalid metric spec: {0}")]
    InvalidMetricSpec(String),

    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),

    #[error("cannot certify tolerance {eps}: unevaluated tail mass is at least {tail}")]
    ToleranceUnreachable { eps: f64, tail: f64 },

    #[error("sample must not be empty")]
    EmptySample,

    #[error("invalid Turing machine: {0}")]
    InvalidMachine(String),

    #[error("head moved left of the start cell at step {step}")]
    HeadUnderflow { step: usize },

    #[error("tape window of width {width} is too small (needs {needed})")]
    WindowTooSmall { width: usize, needed: usize },

    #[error("head left the tape window of width {width}")]
    WindowOverflow { width: usize },

    #[error("malformed tape encoding: {0}")]
    MalformedEncoding(String),
}

impl Error {
    /// Attach the orbit step at which this error occurred.
    pub fn at_step(self, step: usize) -> Error {
        Error::Step {
            step,
            inner: Box::new(self),
        }
    }

    /// True for failures of the product-update runtime guards, including the
    /// tape-window guard of compiled machines.
    pub fn is_guard_violation(&self) -> bool {
        match self {
            Error::NoApplicableDesignatedAction { .. }
            | Error::MultipleApplicableDesignatedActions { .. }
            | Error::WindowOverflow { .. } => true,
            Error::Step { inner, .. } => inner.is_guard_violation(),
            _ => false,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}
