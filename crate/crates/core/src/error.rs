use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("planning error: {0}")]
    Planning(String),

    #[error("simulation diverged at step {step}: {message}")]
    Divergence { step: u64, message: String },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("unknown asset id `{0}`")]
    Lookup(String),

    #[error("out of range: {0}")]
    Range(String),

    #[error(transparent)]
    Rule(#[from] RuleError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category, used by the CLI error report.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "parse",
            Self::Validation { .. } => "validation",
            Self::Config(_) => "config",
            Self::Planning(_) => "planning",
            Self::Divergence { .. } => "divergence",
            Self::Generation(_) => "generation",
            Self::Lookup(_) => "lookup",
            Self::Range(_) => "range",
            Self::Rule(_) => "rule",
            Self::Io { .. } => "io",
            Self::Json { .. } => "json",
            Self::Image { .. } => "image",
        }
    }
}

/// Errors from the procedural plating rule language.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuleError {
    #[error("yaml syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("document is not valid UTF-8")]
    Encoding,

    #[error("{location}: {message}")]
    Structure { location: String, message: String },

    #[error("rule {index}: unknown rule kind `{kind}`")]
    UnknownKind { index: usize, kind: String },

    #[error("rule {index}: missing required field `{field}`")]
    MissingField { index: usize, field: String },

    #[error("{location}: unknown key `{key}`")]
    UnknownKey { location: String, key: String },

    #[error("{location}: `{field}` must be {requirement}, got {value}")]
    Range {
        location: String,
        field: String,
        requirement: String,
        value: String,
    },

    #[error("rule {index}: selector `{selector}` matches no asset id or semantic class")]
    UnresolvedSelector { index: usize, selector: String },

    #[error("rule {index}, item {item}: position {distance:.4} m from plate center exceeds radius {radius:.4} m")]
    Placement {
        index: usize,
        item: usize,
        distance: f64,
        radius: f64,
    },
}
