use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Domain(#[from] ethics2vec::Error),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// 1 for domain and I/O failures, 2 for malformed input or usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Domain(_) => 1,
        }
    }

    pub fn hint(&self) -> Option<&'static str> {
        use ethics2vec::Error as E;
        let CliError::Domain(err) = self else {
            return None;
        };
        Some(match err {
            E::EmptyLog | E::SingleClassLog { .. } => {
                "collect interactions covering both true states (at least 2 of each)"
            }
            E::ZeroVariance { .. } => {
                "one class has a single repeated score; try --method nonparametric"
            }
            E::InconsistentActions { .. } => {
                "the actions are not a threshold rule of the logged scores; check that the score column is the agent's own score"
            }
            E::NoInteriorOptimum(_) => {
                "the operating point carries no trade-off information; collect data where both error types occur"
            }
            E::FlatFprWindow { .. } | E::InsufficientPoints { .. } => {
                "widen the window with --bandwidth or use --method parametric"
            }
            E::TauOutOfRange { .. } => "the operating threshold lies outside the traced curve",
            E::InvalidHorizon { .. } => "choose dt so that horizon / dt is a whole number",
            E::DegenerateDenominator(_) => {
                "the accident-risk derivative vanishes; the weight ratio is not identifiable"
            }
            _ => return None,
        })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
