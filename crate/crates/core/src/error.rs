use std::path::PathBuf;

use thiserror::Error;

/// Identifies which block of a controller or loop raised an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Plant,
    Esc,
    Normalization,
    GradientEstimator,
    TargetModel,
    Rcac,
    Loop,
}

impl std::fmt::Display for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Block::Plant => "plant",
            Block::Esc => "esc",
            Block::Normalization => "normalization",
            Block::GradientEstimator => "gradient estimator",
            Block::TargetModel => "target model",
            Block::Rcac => "rcac",
            Block::Loop => "loop",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration for `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("contract violation in {block}: {reason}")]
    Contract { block: Block, reason: String },

    #[error("simulation diverged in {block} at step {step}")]
    Diverged { block: Block, step: usize },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    /// Attaches a step index to a divergence raised without one.
    pub fn at_step(self, step: usize) -> Self {
        match self {
            Error::Diverged { block, .. } => Error::Diverged { block, step },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
