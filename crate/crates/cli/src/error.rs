use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),

    #[error("refusing to overwrite {0}: it holds different results (remove it or choose another --out)")]
    Overwrite(String),

    #[error("{0}")]
    Numerics(#[from] infmass::Error),

    #[error("malformed input {0}: {1}")]
    Input(String, String),

    #[error("checks failed: {}", .0.join(", "))]
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use infmass::Error as E;
        let code = match self {
            CliError::Config(_) | CliError::Overwrite(_) | CliError::Input(..) => 2,
            CliError::Io(..) => 1,
            CliError::ChecksFailed(_) => 4,
            CliError::Numerics(e) => match e {
                E::InvalidParameter { .. }
                | E::NonSimpleCurve(_)
                | E::TubeTooWide { .. }
                | E::MeshMismatch(_)
                | E::Dimension(_)
                | E::WindowEdge { .. } => 2,
                _ => 3,
            },
        };
        ExitCode::from(code)
    }
}
