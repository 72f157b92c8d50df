use std::path::PathBuf;

/// Errors raised across mesh handling, interpolation, mortar assembly and solves.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate element {elem}: {detail}")]
    DegenerateElement { elem: usize, detail: String },

    #[error("{}format error{}: {msg}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default(), line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format {
        path: Option<PathBuf>,
        line: Option<usize>,
        msg: String,
    },

    #[error("parameter `{name}` = {value} out of range ({allowed})")]
    ParameterOutOfRange {
        name: &'static str,
        value: String,
        allowed: &'static str,
    },

    #[error("ill-conditioned kernel matrix{}: condition estimate {condition:.3e}", master_elem.map(|e| format!(" on master element {e}")).unwrap_or_default())]
    IllConditionedKernelMatrix { master_elem: Option<usize>, condition: f64 },

    #[error("rescale breakdown at query {query}: |denominator| = {denominator:.3e}")]
    RescaleBreakdown { query: usize, denominator: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("singular D: slave nodes with empty rows {nodes:?}")]
    SingularD { nodes: Vec<usize> },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index map error: {0}")]
    IndexMap(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: None,
            line: Some(line),
            msg: msg.into(),
        }
    }
}
