use cltdioph::bounds::BoundsError;
use cltdioph::charfn::CharError;
use cltdioph::dioph::DiophError;
use cltdioph::distkit::DistError;
use cltdioph::edgeworth::EdgeworthError;
use cltdioph::rates::RatesError;

/// Failure of a run, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("resource: {0}")]
    Resource(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    /// The message on a single line.
    pub fn one_line(&self) -> String {
        self.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

impl From<DiophError> for CliError {
    fn from(e: DiophError) -> Self {
        if e.is_precision() {
            CliError::Resource(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        match e {
            DistError::SupportOverflow { .. } => CliError::Resource(e.to_string()),
            DistError::Precision(d) => d.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<CharError> for CliError {
    fn from(e: CharError) -> Self {
        match e {
            CharError::Precision(d) => d.into(),
            CharError::Dist(d) => d.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<EdgeworthError> for CliError {
    fn from(e: EdgeworthError) -> Self {
        match e {
            EdgeworthError::Quadrature(_) => CliError::Resource(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<RatesError> for CliError {
    fn from(e: RatesError) -> Self {
        match e {
            RatesError::Dist(d) => d.into(),
            RatesError::Char(c) => c.into(),
            RatesError::Precision(d) => d.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::QuadratureFailure(_) => CliError::Resource(e.to_string()),
            BoundsError::Dist(d) => d.into(),
            BoundsError::Char(c) => c.into(),
            BoundsError::Edgeworth(x) => x.into(),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Resource(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
