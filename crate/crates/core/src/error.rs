use std::fmt;

/// Pipeline stage used to label protocol failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Fit,
    Angle,
    Reconstruction,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Fit => write!(f, "stage 1 (peak fitting)"),
            Stage::Angle => write!(f, "stage 2 (angle extraction)"),
            Stage::Reconstruction => write!(f, "stage 3 (chi reconstruction)"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("detailed balance violated: ratio {ratio:.6e}, expected {expected:.6e} (relative error {rel:.3e})")]
    DetailedBalance { ratio: f64, expected: f64, rel: f64 },

    #[error("incomplete Kraus set: completeness deviation {0:.3e}")]
    IncompleteKraus(f64),

    #[error("unknown coherence label {0}")]
    UnknownCoherence(String),

    #[error("missing chi entry {0}")]
    MissingChi(String),

    #[error("geometry is not a homodimer: {0}")]
    NotHomodimer(String),

    #[error("dark-state geometry: phi = {0} rad")]
    DarkState(f64),

    #[error("no common real positive root at T = {time} fs (eq1 roots {eq1:?}, eq2 roots {eq2:?})")]
    NoCommonRoot {
        time: f64,
        eq1: Vec<f64>,
        eq2: Vec<f64>,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {file}: {msg}")]
    Parse { file: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn at(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
