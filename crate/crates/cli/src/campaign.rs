//! Randomized verification of every bound against the Fock-basis oracle.

use gaussdist_core::bounds::{bound_pair_basic, report, OverlapConvention};
use gaussdist_core::oracle::arbitration::Arbitration;
use gaussdist_core::oracle::{oracle_compare, OracleConfig, OracleResult, MAX_ORACLE_MODES};
use gaussdist_core::symplectic::{GaussianState, RandomStateConfig, RandomStateParams, StateClass, SymplecticSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::compute::{resolve_convention, ArbitrationSummary};
use crate::table::Row;
use crate::{CliError, ConventionChoice, Outcome};

/// Slack allowed between a bound and the oracle distance.
pub const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct CampaignConfig {
    pub trials: usize,
    pub modes: usize,
    pub seed: u64,
    pub class: StateClass,
    pub sympl_max: f64,
    pub mean_scale: f64,
    pub squeeze: f64,
    pub cutoff: usize,
    pub max_cutoff: usize,
    pub convention: ConventionChoice,
}

impl CampaignConfig {
    /// Defaults sized so the oracle stays accurate at the starting cutoff for most draws.
    pub fn new(modes: usize, class: StateClass, trials: usize, seed: u64) -> Self {
        let (sympl_max, cutoff) = if modes >= 2 { (0.75, 16) } else { (3.0, 60) };
        Self {
            trials,
            modes,
            seed,
            class,
            sympl_max,
            mean_scale: 2.0,
            squeeze: 0.1,
            cutoff,
            max_cutoff: cutoff * 3 / 2,
            convention: ConventionChoice::Quarter,
        }
    }

    fn state_config(&self) -> RandomStateConfig {
        RandomStateConfig { class: self.class, sympl_max: self.sympl_max, mean_scale: self.mean_scale, squeeze: self.squeeze }
    }

    fn check(&self) -> Result<(), CliError> {
        if self.modes == 0 || self.modes > MAX_ORACLE_MODES {
            return Err(CliError::Input(format!("--modes must be between 1 and {MAX_ORACLE_MODES}")));
        }
        if self.trials == 0 {
            return Err(CliError::Input("--trials must be positive".into()));
        }
        if self.cutoff < 2 {
            return Err(CliError::Input("--cutoff must be at least 2".into()));
        }
        if !(self.sympl_max >= 0.5) || !(self.mean_scale >= 0.0) || !(self.squeeze >= 0.0) {
            return Err(CliError::Input("--sympl-max must be ≥ 0.5, --mean-scale and --squeeze ≥ 0".into()));
        }
        Ok(())
    }
}

/// The pair for trial `index`. Odd trials use a second state close to the first.
pub fn trial_pair(config: &CampaignConfig, index: usize) -> Result<(GaussianState, GaussianState), CliError> {
    let space = SymplecticSpace::new(config.modes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let sc = config.state_config();
    let p1 = RandomStateParams::sample(&space, &mut rng, &sc);
    let mut p2 = RandomStateParams::sample(&space, &mut rng, &sc);
    if index % 2 == 1 {
        let t = rng.gen_range(0.02..0.2);
        p2 = p1.interpolate(&p2, t);
    }
    Ok((p1.build(&space)?, p2.build(&space)?))
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub row: Row,
    pub oracle: OracleResult,
}

fn run_trial(config: &CampaignConfig, convention: OverlapConvention, index: usize) -> Result<Trial, CliError> {
    let (s1, s2) = trial_pair(config, index)?;
    let rep = report(&s1, &s2, convention)?;
    let oracle = oracle_compare(&s1, &s2, &OracleConfig::escalating(config.cutoff, config.max_cutoff))?;
    let d = oracle.trace_distance;
    let mut violations = Vec::new();
    for (name, value) in rep.upper_bounds() {
        if d > value + BOUND_SLACK {
            violations.push(name.to_string());
        }
    }
    if d < rep.lower - BOUND_SLACK {
        violations.push("lower".into());
    }
    let (lo, hi) = bound_pair_basic(oracle.overlap);
    if d < lo - BOUND_SLACK {
        violations.push("oracle_overlap_lower".into());
    }
    if d > hi + BOUND_SLACK {
        violations.push("oracle_overlap_upper".into());
    }
    let mut row = Row::new(format!("t{index:04}"), rep);
    row.oracle_distance = Some(d);
    row.oracle_overlap = Some(oracle.overlap);
    row.violations = violations;
    Ok(Trial { row, oracle })
}

/// Distribution of `bound − oracle` for one upper bound.
#[derive(Debug, Clone, Serialize)]
pub struct GapStats {
    pub bound: String,
    pub rows: usize,
    pub min_gap: f64,
    pub max_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub convention_selected: Option<OverlapConvention>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arbitration: Option<ArbitrationSummary>,
    pub violations: usize,
    pub violating_rows: Vec<String>,
    pub max_overlap_error: f64,
    pub max_char_residual: f64,
    pub max_cutoff_used: usize,
    pub gaps: Vec<GapStats>,
    /// Pure class only: largest `|basic_upper − oracle|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pure_gap_basic_upper: Option<f64>,
    /// Pure class only: largest `|2√(1 − F) − oracle|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_pure_gap_sqrt_one_minus_f: Option<f64>,
    #[serde(skip)]
    pub trials: Vec<Trial>,
}

impl CampaignSummary {
    pub fn outcome(&self) -> Outcome {
        if self.convention_selected.is_none() {
            Outcome::Ambiguous
        } else if self.violations > 0 {
            Outcome::Violation
        } else {
            Outcome::Pass
        }
    }

    pub fn rows(&self) -> Vec<Row> {
        self.trials.iter().map(|t| t.row.clone()).collect()
    }
}

pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignSummary, CliError> {
    config.check()?;
    let (selected, arbitration) = resolve_convention(config.convention)?;
    // An ambiguous arbitration still runs the campaign so both errors are on record.
    let convention = selected.unwrap_or_default();
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, convention, i))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(config.clone(), selected, arbitration.as_ref(), trials))
}

fn summarize(
    config: CampaignConfig,
    selected: Option<OverlapConvention>,
    arbitration: Option<&Arbitration>,
    trials: Vec<Trial>,
) -> CampaignSummary {
    let violating_rows: Vec<String> =
        trials.iter().filter(|t| !t.row.violations.is_empty()).map(|t| t.row.case_id.clone()).collect();
    let max_overlap_error =
        trials.iter().map(|t| (t.row.report.overlap.value - t.oracle.overlap).abs()).fold(0.0, f64::max);
    let max_char_residual = trials.iter().map(|t| t.oracle.char_residual).fold(0.0, f64::max);
    let max_cutoff_used = trials.iter().map(|t| t.oracle.cutoff).max().unwrap_or(0);

    let mut gaps: Vec<GapStats> = Vec::new();
    for t in &trials {
        let d = t.oracle.trace_distance;
        for (name, value) in t.row.report.upper_bounds() {
            let gap = value - d;
            match gaps.iter_mut().find(|g| g.bound == name) {
                Some(g) => {
                    g.rows += 1;
                    g.min_gap = g.min_gap.min(gap);
                    g.max_gap = g.max_gap.max(gap);
                }
                None => gaps.push(GapStats { bound: name.to_string(), rows: 1, min_gap: gap, max_gap: gap }),
            }
        }
    }
    let order = ["basic_upper", "intermediate", "e1", "e2", "e3", "lami_t2", "lami_l4"];
    gaps.sort_by_key(|g| order.iter().position(|&n| n == g.bound));

    let (pure_basic, pure_affinity) = if config.class == StateClass::Pure {
        let basic = trials.iter().map(|t| (t.row.report.basic_upper - t.oracle.trace_distance).abs()).fold(0.0, f64::max);
        let affinity = trials
            .iter()
            .map(|t| (2.0 * (1.0 - t.row.report.overlap.value).max(0.0).sqrt() - t.oracle.trace_distance).abs())
            .fold(0.0, f64::max);
        (Some(basic), Some(affinity))
    } else {
        (None, None)
    };

    CampaignSummary {
        config,
        convention_selected: selected,
        arbitration: arbitration.map(ArbitrationSummary::from),
        violations: violating_rows.len(),
        violating_rows,
        max_overlap_error,
        max_char_residual,
        max_cutoff_used,
        gaps,
        max_pure_gap_basic_upper: pure_basic,
        max_pure_gap_sqrt_one_minus_f: pure_affinity,
        trials,
    }
}
