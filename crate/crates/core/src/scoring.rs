//! Note scores and display decisions.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::dataset::RatingsDataset;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// A note's fitted parameters and vote volume.
#[derive(Debug, Clone, PartialEq)]
pub struct NoteScore {
    pub note_id: String,
    pub intercept: f64,
    pub factor: f64,
    pub vote_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoteStatus {
    Displayed,
    NeedsMoreVotes,
    NotDisplayed,
}

impl NoteStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            NoteStatus::Displayed => "DISPLAYED",
            NoteStatus::NeedsMoreVotes => "NEEDS_MORE_VOTES",
            NoteStatus::NotDisplayed => "NOT_DISPLAYED",
        }
    }
}

impl fmt::Display for NoteStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoteStatus {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "DISPLAYED" => Ok(NoteStatus::Displayed),
            "NEEDS_MORE_VOTES" => Ok(NoteStatus::NeedsMoreVotes),
            "NOT_DISPLAYED" => Ok(NoteStatus::NotDisplayed),
            other => Err(format!("unknown note status {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub display_threshold: f64,
    pub min_votes: usize,
    /// Enables the polarization rule: with enough votes, a note below the
    /// display threshold is only `NotDisplayed` when
    /// `intercept < -0.05 - 0.8 * |factor|`, and otherwise stays undecided.
    pub factor_penalty: bool,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            display_threshold: 0.40,
            min_votes: 5,
            factor_penalty: false,
        }
    }
}

const PENALTY_OFFSET: f64 = -0.05;
const PENALTY_SLOPE: f64 = 0.8;

/// One score per note, best first.
///
/// Sorted by intercept descending, ties broken by ascending note id.
pub fn score_notes(params: &ModelParams, data: &RatingsDataset) -> Result<Vec<NoteScore>> {
    params.check_dims(data)?;
    let counts = data.note_vote_counts();
    let mut scores: Vec<NoteScore> = data
        .note_ids()
        .enumerate()
        .map(|(n, id)| NoteScore {
            note_id: id.to_owned(),
            intercept: params.note_intercepts[n],
            factor: params.note_factors[n],
            vote_count: counts[n],
        })
        .collect();
    scores.sort_by(rank_order);
    Ok(scores)
}

fn rank_order(a: &NoteScore, b: &NoteScore) -> Ordering {
    b.intercept
        .total_cmp(&a.intercept)
        .then_with(|| a.note_id.cmp(&b.note_id))
}

pub fn classify(score: &NoteScore, th: &Thresholds) -> NoteStatus {
    if score.vote_count < th.min_votes {
        return NoteStatus::NeedsMoreVotes;
    }
    if score.intercept >= th.display_threshold {
        return NoteStatus::Displayed;
    }
    if th.factor_penalty && score.intercept >= PENALTY_OFFSET - PENALTY_SLOPE * score.factor.abs() {
        return NoteStatus::NeedsMoreVotes;
    }
    NoteStatus::NotDisplayed
}

pub fn classify_all(scores: &[NoteScore], th: &Thresholds) -> Vec<NoteStatus> {
    scores.iter().map(|s| classify(s, th)).collect()
}

/// Fails unless `scores` holds finite values for distinct notes.
pub fn check_scores(scores: &[NoteScore]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for s in scores {
        if !(s.intercept.is_finite() && s.factor.is_finite()) {
            return Err(Error::Contract(format!("non-finite score for note {:?}", s.note_id)));
        }
        if !seen.insert(s.note_id.as_str()) {
            return Err(Error::Contract(format!("note {:?} scored twice", s.note_id)));
        }
    }
    Ok(())
}
