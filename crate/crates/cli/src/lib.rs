//! Library side of the `gaussdist` command-line tool.

pub mod campaign;
pub mod compute;
pub mod sweep;
pub mod table;

use std::path::{Path, PathBuf};

use gaussdist_core::bounds::OverlapConvention;
use gaussdist_core::symplectic::{validate_state, GaussianState, Validity};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    State { path: PathBuf, source: gaussdist_core::Error },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Core(#[from] gaussdist_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// How a command finished when it did not hit an input error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Violation,
    Ambiguous,
}

pub const EXIT_INPUT: i32 = 2;

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 1,
            Outcome::Ambiguous => 3,
        }
    }
}

/// Overlap convention requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionChoice {
    PaperHalf,
    Quarter,
    Auto,
}

impl ConventionChoice {
    pub fn fixed(self) -> Option<OverlapConvention> {
        match self {
            ConventionChoice::PaperHalf => Some(OverlapConvention::PaperHalf),
            ConventionChoice::Quarter => Some(OverlapConvention::Quarter),
            ConventionChoice::Auto => None,
        }
    }
}

impl std::str::FromStr for ConventionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(ConventionChoice::Auto),
            other => other.parse::<OverlapConvention>().map(|c| match c {
                OverlapConvention::PaperHalf => ConventionChoice::PaperHalf,
                OverlapConvention::Quarter => ConventionChoice::Quarter,
            }).map_err(|_| format!("unknown convention `{other}` (expected paper_half|quarter|auto)")),
        }
    }
}

/// Reads and validates a state file.
pub fn load_state(path: &Path) -> Result<GaussianState, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let state = GaussianState::from_json(&text).map_err(|source| CliError::State { path: path.to_path_buf(), source })?;
    match validate_state(&state) {
        Validity::Valid => Ok(state),
        Validity::Invalid(reason) => Err(CliError::State {
            path: path.to_path_buf(),
            source: gaussdist_core::Error::InvalidState(reason),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convention_choice_parses() {
        assert_eq!("auto".parse::<ConventionChoice>(), Ok(ConventionChoice::Auto));
        assert_eq!("quarter".parse::<ConventionChoice>(), Ok(ConventionChoice::Quarter));
        assert_eq!("paper_half".parse::<ConventionChoice>(), Ok(ConventionChoice::PaperHalf));
        assert!("half".parse::<ConventionChoice>().is_err());
        assert_eq!(ConventionChoice::Auto.fixed(), None);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Outcome::Pass.exit_code(), 0);
        assert_eq!(Outcome::Violation.exit_code(), 1);
        assert_eq!(Outcome::Ambiguous.exit_code(), 3);
    }
}
