//! Label-free hyperparameter selection over a sweep of runs.
//!
//! [`select_by_rank`] walks the runs in manifest order (increasing or
//! decreasing hyperparameter value), keeping an incumbent:
//!
//! ```text
//! best <- run 1
//! for i = 2..N:
//!     if r_i > r_best:                                   replace
//!     elif r_i == r_best and (r_i > r_{i-1} or r_i > r_{i+1}): replace
//! ```
//!
//! A missing neighbor (`r_{N+1}`) compares as false. The tie rule moves the
//! incumbent to the edge of a plateau of equal maxima.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::RunManifest;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("run {0:?} has no rank")]
    MissingRank(String),
    #[error("run {0:?} has no alpha")]
    MissingAlpha(String),
    #[error("no runs to select from")]
    Empty,
    #[error("tie tolerance must be a nonnegative finite number, got {0}")]
    InvalidTolerance(f64),
}

/// Caps a rank at `cap`, e.g. the representation width when the projector
/// is wider than the backbone.
pub fn clip_rank(rank: f64, cap: f64) -> f64 {
    debug_assert!(cap > 0.0, "clip cap must be positive");
    rank.min(cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    KeptInitial,
    ReplacedByGreater,
    ReplacedByTiebreak,
    /// Alpha strategy only: the run scored strictly better than the incumbent.
    ReplacedByBetterAlpha,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Rankme,
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub run_id: String,
    /// Rank after clipping; absent only for alpha selection on runs without a rank.
    pub rank: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen_run_id: String,
    pub chosen_index: usize,
    pub chosen_rank: Option<f64>,
    pub strategy: Strategy,
    pub trace: Vec<TraceEntry>,
    /// Set when the manifest is unordered and several runs share the maximal
    /// rank: the plateau rule is meaningless there, so every maximal run is
    /// listed for the caller to decide.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tied_maxima: Vec<String>,
}

impl SelectionResult {
    pub fn is_ambiguous(&self) -> bool {
        !self.tied_maxima.is_empty()
    }
}

/// Relative float comparison used by the rank walk.
#[derive(Debug, Clone, Copy)]
struct Tolerance(f64);

impl Tolerance {
    fn equal(self, a: f64, b: f64) -> bool {
        a == b || (a - b).abs() <= self.0 * a.abs().max(b.abs())
    }

    fn greater(self, a: f64, b: f64) -> bool {
        a > b && !self.equal(a, b)
    }
}

/// Per-run ranks with each run's `clip_cap` applied.
pub fn clipped_ranks(m: &RunManifest) -> Result<Vec<f64>, SelectionError> {
    m.runs
        .iter()
        .map(|run| {
            let r = run
                .rank
                .ok_or_else(|| SelectionError::MissingRank(run.run_id.clone()))?;
            Ok(match run.clip_cap {
                Some(cap) => clip_rank(r, cap),
                None => r,
            })
        })
        .collect()
}

/// Picks the highest-rank run, resolving ties with the plateau rule.
/// `tie_tolerance` is relative; 0 means exact equality.
pub fn select_by_rank(m: &RunManifest, tie_tolerance: f64) -> Result<SelectionResult, SelectionError> {
    if !(tie_tolerance.is_finite() && tie_tolerance >= 0.0) {
        return Err(SelectionError::InvalidTolerance(tie_tolerance));
    }
    if m.runs.is_empty() {
        return Err(SelectionError::Empty);
    }
    let ranks = clipped_ranks(m)?;
    let tol = Tolerance(tie_tolerance);

    let mut decisions = vec![Decision::KeptInitial];
    let mut best = 0;
    for i in 1..ranks.len() {
        let r = ranks[i];
        let decision = if tol.greater(r, ranks[best]) {
            Decision::ReplacedByGreater
        } else if tol.equal(r, ranks[best])
            && (tol.greater(r, ranks[i - 1])
                || ranks.get(i + 1).is_some_and(|&next| tol.greater(r, next)))
        {
            Decision::ReplacedByTiebreak
        } else {
            Decision::Skipped
        };
        if decision != Decision::Skipped {
            best = i;
        }
        decisions.push(decision);
    }

    let mut tied_maxima = Vec::new();
    if !m.ordered {
        let max = ranks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<String> = m
            .runs
            .iter()
            .zip(&ranks)
            .filter(|(_, &r)| tol.equal(r, max))
            .map(|(run, _)| run.run_id.clone())
            .collect();
        if tied.len() >= 2 {
            log::warn!(
                "manifest axis {:?} is unordered and {} runs share the maximal rank",
                m.axis_name,
                tied.len()
            );
            tied_maxima = tied;
        }
    }

    let trace = m
        .runs
        .iter()
        .zip(&ranks)
        .zip(decisions)
        .map(|((run, &rank), decision)| TraceEntry {
            run_id: run.run_id.clone(),
            rank: Some(rank),
            alpha: run.alpha,
            decision,
        })
        .collect();
    Ok(SelectionResult {
        chosen_run_id: m.runs[best].run_id.clone(),
        chosen_index: best,
        chosen_rank: Some(ranks[best]),
        strategy: Strategy::Rankme,
        trace,
        tied_maxima,
    })
}

/// Scores an alpha exponent; lower is better.
pub trait AlphaCriterion {
    fn score(&self, alpha: f64) -> f64;
}

/// `|alpha - 1|`: spectra decaying like `1/i` are preferred.
#[derive(Debug, Clone, Copy, Default)]
pub struct DistanceToOne;

impl AlphaCriterion for DistanceToOne {
    fn score(&self, alpha: f64) -> f64 {
        (alpha - 1.0).abs()
    }
}

/// Alpha values stored in the manifest itself.
pub fn manifest_alphas(m: &RunManifest) -> HashMap<String, f64> {
    m.runs
        .iter()
        .filter_map(|r| r.alpha.map(|a| (r.run_id.clone(), a)))
        .collect()
}

/// Baseline selection: the run whose alpha is closest to 1, earliest on ties.
pub fn select_by_alpha(
    m: &RunManifest,
    alphas: &HashMap<String, f64>,
) -> Result<SelectionResult, SelectionError> {
    select_by_alpha_with(m, alphas, &DistanceToOne)
}

pub fn select_by_alpha_with<C: AlphaCriterion + ?Sized>(
    m: &RunManifest,
    alphas: &HashMap<String, f64>,
    criterion: &C,
) -> Result<SelectionResult, SelectionError> {
    if m.runs.is_empty() {
        return Err(SelectionError::Empty);
    }
    let values = m
        .runs
        .iter()
        .map(|run| {
            alphas
                .get(&run.run_id)
                .copied()
                .ok_or_else(|| SelectionError::MissingAlpha(run.run_id.clone()))
        })
        .collect::<Result<Vec<f64>, _>>()?;

    let mut best = 0;
    let mut best_score = criterion.score(values[0]);
    let mut decisions = vec![Decision::KeptInitial];
    for (i, &a) in values.iter().enumerate().skip(1) {
        let score = criterion.score(a);
        if score < best_score {
            best = i;
            best_score = score;
            decisions.push(Decision::ReplacedByBetterAlpha);
        } else {
            decisions.push(Decision::Skipped);
        }
    }

    let rank_of = |i: usize| {
        let run = &m.runs[i];
        run.rank.map(|r| run.clip_cap.map_or(r, |c| clip_rank(r, c)))
    };
    let trace = m
        .runs
        .iter()
        .enumerate()
        .zip(decisions)
        .map(|((i, run), decision)| TraceEntry {
            run_id: run.run_id.clone(),
            rank: rank_of(i),
            alpha: Some(values[i]),
            decision,
        })
        .collect();
    Ok(SelectionResult {
        chosen_run_id: m.runs[best].run_id.clone(),
        chosen_index: best,
        chosen_rank: rank_of(best),
        strategy: Strategy::Alpha,
        trace,
        tied_maxima: Vec::new(),
    })
}
