//! Off-chain aggregation of collected responses.
//!
//! Four procedures, one per task type: plurality counts for choices, Borda
//! scores for rankings, exact rational means and lower medians for
//! sortings, and per-alternative majority for classifications.
//!
//! Ranking convention: `R[i]` is the rank assigned to alternative `i`,
//! 0 being most preferred. Class 0 is the most preferred class for
//! sortings. Ties are reported, never broken.

use num_rational::Ratio;
use thiserror::Error;

use crate::model::{HipSpec, HipType};
use crate::validation::{validate_response, ResponseVector};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum AggregationError {
    #[error("invalid response at index {0}")]
    InvalidResponse(usize),
    #[error("no responses to aggregate")]
    Empty,
}

/// Plurality outcome: per-alternative counts plus the argmax set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub method: &'static str,
    pub counts: Vec<u64>,
    pub winners: Vec<u64>,
}

/// Borda outcome: per-alternative scores plus the aggregate order as
/// tiers of equal score, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingTally {
    pub method: &'static str,
    pub scores: Vec<u64>,
    pub order: Vec<Vec<u64>>,
}

/// Score outcome: exact rational mean class and lower median class per
/// alternative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTally {
    pub method: &'static str,
    pub means: Vec<Ratio<u64>>,
    pub medians: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MajorityOutcome {
    Class(u64),
    Tie(Vec<u64>),
}

/// Classification outcome: the full count matrix (alternative x class)
/// plus the per-alternative majority class or tie set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationTally {
    pub method: &'static str,
    pub counts: Vec<Vec<u64>>,
    pub outcomes: Vec<MajorityOutcome>,
}

fn synthetic_spec(hip_type: HipType, n: u64, k: u64) -> HipSpec {
    HipSpec {
        hip_type,
        num_alternatives: n,
        num_classes: k,
        creation_date: 0,
        duration: 0,
        num_responses: 0,
    }
}

fn check_all(
    responses: &[ResponseVector],
    spec: &HipSpec,
) -> Result<(), AggregationError> {
    for (i, r) in responses.iter().enumerate() {
        validate_response(spec, r).map_err(|_| AggregationError::InvalidResponse(i))?;
    }
    Ok(())
}

fn argmax_set(counts: &[u64]) -> Vec<u64> {
    let max = counts.iter().copied().max().unwrap_or(0);
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == max)
        .map(|(i, _)| i as u64)
        .collect()
}

/// Count singleton choices; winners are the argmax set, empty for empty
/// input.
pub fn plurality(choices: &[ResponseVector], n: u64) -> Result<Tally, AggregationError> {
    let spec = synthetic_spec(HipType::Choice, n, 0);
    check_all(choices, &spec)?;
    let mut counts = vec![0u64; n as usize];
    for c in choices {
        counts[c[0] as usize] += 1;
    }
    let winners = if choices.is_empty() { Vec::new() } else { argmax_set(&counts) };
    Ok(Tally { method: "plurality", counts, winners })
}

/// Borda aggregation: alternative `i` earns `n - 1 - R[i]` per response.
pub fn aggregate_ranking(
    rankings: &[ResponseVector],
    n: u64,
) -> Result<RankingTally, AggregationError> {
    let spec = synthetic_spec(HipType::Ranking, n, 0);
    check_all(rankings, &spec)?;
    let mut scores = vec![0u64; n as usize];
    for r in rankings {
        for (alt, &rank) in r.iter().enumerate() {
            scores[alt] += n - 1 - rank;
        }
    }
    let order = if rankings.is_empty() {
        Vec::new()
    } else {
        let mut by_score: Vec<(u64, u64)> =
            scores.iter().enumerate().map(|(i, &s)| (i as u64, s)).collect();
        by_score.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut tiers: Vec<Vec<u64>> = Vec::new();
        let mut last_score = None;
        for (alt, score) in by_score {
            if last_score == Some(score) {
                tiers.last_mut().unwrap().push(alt);
            } else {
                tiers.push(vec![alt]);
                last_score = Some(score);
            }
        }
        tiers
    };
    Ok(RankingTally { method: "borda", scores, order })
}

/// Exact rational mean class and lower median class per alternative.
pub fn aggregate_scores(
    sortings: &[ResponseVector],
    n: u64,
    k: u64,
) -> Result<ScoreTally, AggregationError> {
    let spec = synthetic_spec(HipType::Sorting, n, k);
    check_all(sortings, &spec)?;
    if sortings.is_empty() {
        return Err(AggregationError::Empty);
    }
    let count = sortings.len() as u64;
    let mut means = Vec::with_capacity(n as usize);
    let mut medians = Vec::with_capacity(n as usize);
    for alt in 0..n as usize {
        let mut column: Vec<u64> = sortings.iter().map(|r| r[alt]).collect();
        let sum: u64 = column.iter().sum();
        means.push(Ratio::new(sum, count));
        column.sort_unstable();
        medians.push(column[(column.len() - 1) / 2]);
    }
    Ok(ScoreTally { method: "scores", means, medians })
}

/// Per-alternative majority class; ties are reported with the tied set.
pub fn majority_classify(
    classifications: &[ResponseVector],
    n: u64,
    k: u64,
) -> Result<ClassificationTally, AggregationError> {
    let spec = synthetic_spec(HipType::Classification, n, k);
    check_all(classifications, &spec)?;
    if classifications.is_empty() {
        return Err(AggregationError::Empty);
    }
    let mut counts = vec![vec![0u64; k as usize]; n as usize];
    for r in classifications {
        for (alt, &class) in r.iter().enumerate() {
            counts[alt][class as usize] += 1;
        }
    }
    let outcomes = counts
        .iter()
        .map(|per_class| {
            let tied = argmax_set(per_class);
            if tied.len() == 1 {
                MajorityOutcome::Class(tied[0])
            } else {
                MajorityOutcome::Tie(tied)
            }
        })
        .collect();
    Ok(ClassificationTally { method: "majority", counts, outcomes })
}
