use std::path::PathBuf;

use critshe::diagrams::DiagramError;
use critshe::gausscalc::GaussError;
use critshe::mollifier::MollifierError;
use critshe::momentengine::MomentError;
use critshe::shesim::SimError;
use critshe::simplexint::SimplexError;
use critshe::specfun::SpecFunError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match &e {
            MomentError::Request(_) | MomentError::Diagram(_) => CliError::Validation(e.to_string()),
            MomentError::Simplex(s) if is_plan_error(s) => CliError::Validation(e.to_string()),
            MomentError::Gauss(GaussError::Domain(_)) | MomentError::SpecFun(SpecFunError::Domain(_)) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn is_plan_error(e: &SimplexError) -> bool {
    matches!(e, SimplexError::Plan(_) | SimplexError::UnknownIntegrator { .. } | SimplexError::Domain(_))
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::Blowup { .. } => CliError::Numerical(e.to_string()),
            SimError::Mollifier(m) if !matches!(m, MollifierError::Domain(_) | MollifierError::UnknownProfile { .. }) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MollifierError> for CliError {
    fn from(e: MollifierError) -> Self {
        match e {
            MollifierError::Domain(_) | MollifierError::UnknownProfile { .. } | MollifierError::Resolution { .. } => {
                CliError::Validation(e.to_string())
            }
            MollifierError::Accuracy(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<DiagramError> for CliError {
    fn from(e: DiagramError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SpecFunError> for CliError {
    fn from(e: SpecFunError) -> Self {
        match e {
            SpecFunError::Domain(_) | SpecFunError::Config(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<GaussError> for CliError {
    fn from(e: GaussError) -> Self {
        match e {
            GaussError::Domain(_) | GaussError::Mismatch(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Numerical(format!("csv encoding: {e}"))
    }
}
