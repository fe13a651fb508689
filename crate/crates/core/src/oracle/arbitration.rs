//! Choosing the overlap exponent coefficient empirically on displaced coherent pairs.

use serde::{Deserialize, Serialize};

use super::{gaussian_density, overlap_oracle, Quadrature};
use crate::bounds::{overlap, OverlapConvention};
use crate::error::Result;
use crate::symplectic::GaussianState;

pub const ARBITRATION_PAIRS: usize = 20;
/// The winner's worst error must be this many times smaller than the loser's.
pub const SELECTION_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArbitrationCase {
    pub mean_a: [f64; 2],
    pub mean_b: [f64; 2],
    pub mean_dist: f64,
    pub oracle: f64,
    pub paper_half: f64,
    pub quarter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arbitration {
    pub cases: Vec<ArbitrationCase>,
    pub max_error_paper_half: f64,
    pub max_error_quarter: f64,
    /// `None` when neither convention wins by [`SELECTION_RATIO`].
    pub selected: Option<OverlapConvention>,
}

impl Arbitration {
    pub fn max_error(&self, convention: OverlapConvention) -> f64 {
        match convention {
            OverlapConvention::PaperHalf => self.max_error_paper_half,
            OverlapConvention::Quarter => self.max_error_quarter,
        }
    }
}

/// Pair means: `‖m₂ − m₁‖` spread evenly over `[0.5, 2]`, directions and the
/// base point rotating with the index.
pub fn arbitration_pairs() -> Vec<([f64; 2], [f64; 2])> {
    (0..ARBITRATION_PAIRS)
        .map(|k| {
            let t = k as f64 / (ARBITRATION_PAIRS - 1) as f64;
            let dist = 0.5 + 1.5 * t;
            let theta = 2.399963 * k as f64;
            let base = if k % 2 == 0 { [0.0, 0.0] } else { [0.3 * (0.7 * k as f64).cos(), 0.3 * (0.7 * k as f64).sin()] };
            (base, [base[0] + dist * theta.cos(), base[1] + dist * theta.sin()])
        })
        .collect()
}

pub fn arbitrate(cutoff: usize) -> Result<Arbitration> {
    arbitrate_on(&arbitration_pairs(), cutoff)
}

pub fn arbitrate_on(pairs: &[([f64; 2], [f64; 2])], cutoff: usize) -> Result<Arbitration> {
    let mut cases = Vec::with_capacity(pairs.len());
    for &(ma, mb) in pairs {
        let s1 = GaussianState::coherent(&ma)?;
        let s2 = GaussianState::coherent(&mb)?;
        let d1 = gaussian_density(&s1, cutoff, Quadrature::GaussHermite)?;
        let d2 = gaussian_density(&s2, cutoff, Quadrature::GaussHermite)?;
        cases.push(ArbitrationCase {
            mean_a: ma,
            mean_b: mb,
            mean_dist: (s2.mean() - s1.mean()).norm(),
            oracle: overlap_oracle(&d1, &d2)?,
            paper_half: overlap(&s1, &s2, OverlapConvention::PaperHalf)?.value,
            quarter: overlap(&s1, &s2, OverlapConvention::Quarter)?.value,
        });
    }
    let worst = |f: fn(&ArbitrationCase) -> f64| cases.iter().map(|c| (f(c) - c.oracle).abs()).fold(0.0, f64::max);
    let half = worst(|c| c.paper_half);
    let quarter = worst(|c| c.quarter);
    let selected = if quarter * SELECTION_RATIO <= half {
        Some(OverlapConvention::Quarter)
    } else if half * SELECTION_RATIO <= quarter {
        Some(OverlapConvention::PaperHalf)
    } else {
        None
    };
    Ok(Arbitration { cases, max_error_paper_half: half, max_error_quarter: quarter, selected })
}
