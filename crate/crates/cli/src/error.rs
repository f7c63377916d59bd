use serde::Serialize;
use udisc_core::Error;

/// Why a run stopped: bad configuration (exit 2) or a failed experiment (exit 1).
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Experiment(Error),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    pub fn config(e: impl ToString) -> Self {
        Failure::Config(e.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Experiment(_) | Failure::Io(_) => 1,
        }
    }

    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            message: String,
        }
        let error = match self {
            Failure::Config(_) => "config",
            Failure::Experiment(_) => "experiment",
            Failure::Io(_) => "io",
        };
        serde_json::to_string(&Record {
            error,
            message: self.to_string(),
        })
        .expect("error record serializes")
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Experiment(e)
    }
}
