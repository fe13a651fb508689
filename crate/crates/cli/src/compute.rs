//! Bounds for one pair of state files.

use gaussdist_core::bounds::{report, BoundReport, OverlapConvention};
use gaussdist_core::oracle::arbitration::{arbitrate, Arbitration};
use gaussdist_core::oracle::{oracle_compare, OracleConfig, OracleResult, MAX_ORACLE_MODES};
use gaussdist_core::symplectic::GaussianState;
use serde::Serialize;

use crate::{CliError, ConventionChoice, Outcome};

/// Cutoff for the single-mode coherent pairs used by `--convention auto`.
pub const ARBITRATION_CUTOFF: usize = 60;

#[derive(Debug, Clone, Serialize)]
pub struct ComputeOutput {
    /// `None` when arbitration could not pick a convention.
    pub convention_selected: Option<OverlapConvention>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arbitration: Option<ArbitrationSummary>,
    /// One report per convention evaluated.
    pub reports: Vec<BoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArbitrationSummary {
    pub pairs: usize,
    pub max_error_paper_half: f64,
    pub max_error_quarter: f64,
}

impl From<&Arbitration> for ArbitrationSummary {
    fn from(a: &Arbitration) -> Self {
        Self { pairs: a.cases.len(), max_error_paper_half: a.max_error_paper_half, max_error_quarter: a.max_error_quarter }
    }
}

impl ComputeOutput {
    pub fn outcome(&self) -> Outcome {
        if self.convention_selected.is_some() {
            Outcome::Pass
        } else {
            Outcome::Ambiguous
        }
    }
}

/// Resolves a convention choice, running arbitration for `auto`.
pub fn resolve_convention(choice: ConventionChoice) -> Result<(Option<OverlapConvention>, Option<Arbitration>), CliError> {
    match choice.fixed() {
        Some(c) => Ok((Some(c), None)),
        None => {
            let arb = arbitrate(ARBITRATION_CUTOFF)?;
            Ok((arb.selected, Some(arb)))
        }
    }
}

pub fn compute(
    s1: &GaussianState,
    s2: &GaussianState,
    choice: ConventionChoice,
    oracle_cutoff: Option<usize>,
) -> Result<ComputeOutput, CliError> {
    if s1.modes() != s2.modes() {
        return Err(CliError::Input(format!(
            "mode counts differ: {} and {}",
            s1.modes(),
            s2.modes()
        )));
    }
    let (selected, arbitration) = resolve_convention(choice)?;
    let conventions: Vec<OverlapConvention> = match selected {
        Some(c) => vec![c],
        None => OverlapConvention::ALL.to_vec(),
    };
    let reports = conventions.iter().map(|&c| report(s1, s2, c)).collect::<Result<Vec<_>, _>>()?;
    let oracle = match oracle_cutoff {
        Some(cutoff) => {
            if s1.modes() > MAX_ORACLE_MODES {
                return Err(CliError::Input(format!("oracle supports at most {MAX_ORACLE_MODES} modes")));
            }
            Some(oracle_compare(s1, s2, &OracleConfig::escalating(cutoff, cutoff * 2))?)
        }
        None => None,
    };
    Ok(ComputeOutput {
        convention_selected: selected,
        arbitration: arbitration.as_ref().map(ArbitrationSummary::from),
        reports,
        oracle,
    })
}
