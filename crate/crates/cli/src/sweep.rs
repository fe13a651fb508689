//! Grid sweeps over product states.

use std::path::Path;

use gaussdist_core::bounds::report;
use gaussdist_core::oracle::{oracle_compare, OracleConfig, MAX_ORACLE_MODES};
use gaussdist_core::symplectic::{GaussianState, SymplecticSpace};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Deserialize;

use crate::table::Row;
use crate::{CliError, ConventionChoice};

/// Values taken by one state of the pair. Every mode gets the same `a` and
/// `squeeze`; the displacement sits on the first position quadrature.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateAxes {
    /// Covariance scale per mode (`0.5` is the vacuum).
    #[serde(default = "default_a")]
    pub a: Vec<f64>,
    /// Squeezing parameter `r`: `diag(a·e^{2r}, a·e^{−2r})` per mode.
    #[serde(default = "default_zero")]
    pub squeeze: Vec<f64>,
    /// `‖m‖₂`.
    #[serde(default = "default_zero")]
    pub displacement: Vec<f64>,
}

fn default_a() -> Vec<f64> {
    vec![0.5]
}

fn default_zero() -> Vec<f64> {
    vec![0.0]
}

impl Default for StateAxes {
    fn default() -> Self {
        Self { a: default_a(), squeeze: default_zero(), displacement: default_zero() }
    }
}

impl StateAxes {
    fn points(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        for &a in &self.a {
            for &r in &self.squeeze {
                for &d in &self.displacement {
                    out.push([a, r, d]);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub state1: StateAxes,
    #[serde(default)]
    pub state2: StateAxes,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default = "default_convention")]
    pub convention: ConventionChoice,
}

fn default_modes() -> usize {
    1
}

fn default_convention() -> ConventionChoice {
    ConventionChoice::Quarter
}

impl Grid {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }

    pub fn pairs(&self) -> Vec<([f64; 3], [f64; 3])> {
        let second = self.state2.points();
        self.state1.points().into_iter().flat_map(|p| second.iter().map(move |&q| (p, q))).collect()
    }
}

/// Product state with the same `(a, r)` in every mode.
pub fn grid_state(modes: usize, [a, r, d]: [f64; 3]) -> Result<GaussianState, CliError> {
    let space = SymplecticSpace::new(modes)?;
    let n = space.dim();
    let diag: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { a * (2.0 * r).exp() } else { a * (-2.0 * r).exp() }).collect();
    let mut mean = DVector::zeros(n);
    mean[0] = d;
    GaussianState::new(space, mean, DMatrix::from_diagonal(&DVector::from_vec(diag)))
        .map_err(|e| CliError::Input(format!("grid point a={a}, squeeze={r}, displacement={d}: {e}")))
}

pub struct SweepResult {
    pub rows: Vec<Row>,
    /// Rows whose oracle failed, with the reason.
    pub oracle_failures: Vec<(String, String)>,
}

pub fn run_sweep(grid: &Grid, with_oracle: bool) -> Result<SweepResult, CliError> {
    if grid.modes == 0 {
        return Err(CliError::Input("grid: modes must be at least 1".into()));
    }
    let pairs = grid.pairs();
    if pairs.is_empty() {
        return Err(CliError::Input("grid is empty: every axis needs at least one value".into()));
    }
    let convention = match grid.convention.fixed() {
        Some(c) => c,
        None => crate::compute::resolve_convention(ConventionChoice::Auto)?
            .0
            .ok_or_else(|| CliError::Input("grid: convention arbitration was ambiguous".into()))?,
    };
    let states = pairs
        .iter()
        .map(|&(p, q)| Ok((grid_state(grid.modes, p)?, grid_state(grid.modes, q)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let oracle_on = with_oracle && grid.modes <= MAX_ORACLE_MODES;
    let cutoff = grid.cutoff.unwrap_or(if grid.modes >= 2 { 16 } else { 60 });

    let results = states
        .par_iter()
        .enumerate()
        .map(|(i, (s1, s2))| {
            let mut row = Row::new(format!("g{i:04}"), report(s1, s2, convention)?);
            let mut failure = None;
            if oracle_on {
                match oracle_compare(s1, s2, &OracleConfig::escalating(cutoff, cutoff * 2)) {
                    Ok(o) => {
                        row.oracle_distance = Some(o.trace_distance);
                        row.oracle_overlap = Some(o.overlap);
                    }
                    Err(e) => failure = Some((row.case_id.clone(), e.to_string())),
                }
            }
            Ok((row, failure))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut rows = Vec::with_capacity(results.len());
    let mut oracle_failures = Vec::new();
    for (row, failure) in results {
        rows.push(row);
        oracle_failures.extend(failure);
    }
    Ok(SweepResult { rows, oracle_failures })
}
