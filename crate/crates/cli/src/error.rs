use serde::Serialize;

/// Failure of one CLI operation, classified for the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Unreadable or malformed input: curve files, configs, flag values.
    #[error("{operation}: {message}")]
    Parse {
        operation: &'static str,
        message: String,
    },
    /// The computation rejected its input.
    #[error("{operation}: {source}")]
    Core {
        operation: &'static str,
        #[source]
        source: ecc_core::Error,
    },
    /// Anything else, e.g. failing to write output.
    #[error("{operation}: {message}")]
    Internal {
        operation: &'static str,
        message: String,
    },
}

impl CliError {
    pub fn parse(operation: &'static str, message: impl Into<String>) -> Self {
        CliError::Parse {
            operation,
            message: message.into(),
        }
    }

    pub fn internal(operation: &'static str, message: impl ToString) -> Self {
        CliError::Internal {
            operation,
            message: message.to_string(),
        }
    }

    /// Wraps a library error raised by `operation`.
    pub fn core(operation: &'static str) -> impl FnOnce(ecc_core::Error) -> Self {
        move |source| CliError::Core { operation, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } => 2,
            CliError::Core { .. } => 3,
            CliError::Internal { .. } => 1,
        }
    }

    pub fn operation(&self) -> &'static str {
        match self {
            CliError::Parse { operation, .. }
            | CliError::Core { operation, .. }
            | CliError::Internal { operation, .. } => operation,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Core { source, .. } if source.is_degenerate() => "degenerate",
            CliError::Core { .. } => "domain",
            CliError::Internal { .. } => "internal",
        }
    }

    /// Machine-readable form printed on standard error.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            error: Inner<'a>,
        }
        #[derive(Serialize)]
        struct Inner<'a> {
            operation: &'a str,
            kind: &'a str,
            code: u8,
            message: String,
        }
        let message = match self {
            CliError::Parse { message, .. } | CliError::Internal { message, .. } => message.clone(),
            CliError::Core { source, .. } => source.to_string(),
        };
        serde_json::to_string(&Body {
            error: Inner {
                operation: self.operation(),
                kind: self.kind(),
                code: self.exit_code(),
                message,
            },
        })
        .expect("error body serializes")
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
