use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed scenario text: syntax, unknown or missing fields, bad types.
    #[error("parse error{}: {field}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse {
        line: Option<usize>,
        field: String,
        msg: String,
    },

    /// Well-formed but describes something that cannot be evaluated.
    #[error("validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Analytic(#[from] swdiv::Error),

    #[error("unknown figure '{0}' (see `figures list`)")]
    UnknownFigure(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub(crate) fn parse(line: Option<usize>, field: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Parse {
            line,
            field: field.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
