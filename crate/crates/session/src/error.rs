use thiserror::Error;

/// Errors raised while parsing or running a session script.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse { line: usize, col: usize, message: String },

    #[error("name error at {line}:{col}: {message}")]
    Name {
        line: usize,
        col: usize,
        name: String,
        message: String,
    },

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error(transparent)]
    Core(#[from] indiga_core::Error),
}

impl SessionError {
    pub fn parse(line: usize, col: usize, message: impl Into<String>) -> Self {
        SessionError::Parse {
            line,
            col,
            message: message.into(),
        }
    }

    pub fn name(line: usize, col: usize, name: &str, message: impl Into<String>) -> Self {
        SessionError::Name {
            line,
            col,
            name: name.to_string(),
            message: message.into(),
        }
    }

    pub fn eval(message: impl Into<String>) -> Self {
        SessionError::Eval(message.into())
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            SessionError::Parse { .. } => "ParseError",
            SessionError::Name { .. } => "NameError",
            SessionError::Eval(_) => "EvalError",
            SessionError::Core(e) => match e {
                indiga_core::Error::Universe(_) => "UniverseError",
                indiga_core::Error::ResourceExceeded(_) => "ResourceExceeded",
                indiga_core::Error::Presentation(_) => "PresentationError",
                indiga_core::Error::Compatibility(_) => "CompatibilityError",
                indiga_core::Error::IllDefinedDerivation { .. } => "IllDefinedDerivation",
                indiga_core::Error::RequiresCertificate(_) => "RequiresCertificate",
                indiga_core::Error::Precondition { .. } => "PreconditionFailed",
                indiga_core::Error::NotLocallyNilpotent { .. } => "NotLocallyNilpotent",
                indiga_core::Error::ExponentOverflow => "ExponentOverflow",
            },
        }
    }
}
