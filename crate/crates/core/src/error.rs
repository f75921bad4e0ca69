use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The contention graph was asked to do something inconsistent with its shape.
    #[error("structural error: {0}")]
    Structural(String),

    /// A configuration file or override could not be understood. `line` is
    /// 1-based within the config file, 0 for command-line arguments.
    #[error("config error{}: {message}", location(*line))]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

fn location(line: usize) -> String {
    if line == 0 {
        " in command-line arguments".to_string()
    } else {
        format!(" at line {line}")
    }
}
