//! Sparse vote collections with dense user/note indices.
//!
//! Identifiers are assigned dense indices in first-appearance order, so a
//! dataset built from the same sequence of calls always has the same layout.

use std::collections::HashMap;

use indexmap::IndexSet;

use crate::error::{Error, Result};

/// One rater's vote on one note, keyed by the external identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Vote {
    pub user_id: String,
    pub note_id: String,
    pub rating: f64,
}

impl Vote {
    pub fn new(user_id: impl Into<String>, note_id: impl Into<String>, rating: f64) -> Self {
        Vote {
            user_id: user_id.into(),
            note_id: note_id.into(),
            rating,
        }
    }
}

/// A vote expressed in dense indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexedVote {
    pub user: usize,
    pub note: usize,
    pub rating: f64,
}

/// What to do when the same (user, note) pair is seen twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DuplicatePolicy {
    #[default]
    Reject,
    /// Keep the position of the first vote, overwrite its rating.
    LastWriteWins,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsDataset {
    users: IndexSet<String>,
    notes: IndexSet<String>,
    votes: Vec<IndexedVote>,
}

impl RatingsDataset {
    /// Builds a dataset from votes, rejecting duplicates.
    pub fn from_votes<I>(votes: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vote>,
    {
        let mut b = DatasetBuilder::new(DuplicatePolicy::Reject);
        for v in votes {
            b.push(&v.user_id, &v.note_id, v.rating)?;
        }
        Ok(b.finish())
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_notes(&self) -> usize {
        self.notes.len()
    }

    pub fn num_votes(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    pub fn votes(&self) -> &[IndexedVote] {
        &self.votes
    }

    pub fn user_id(&self, idx: usize) -> Option<&str> {
        self.users.get_index(idx).map(String::as_str)
    }

    pub fn note_id(&self, idx: usize) -> Option<&str> {
        self.notes.get_index(idx).map(String::as_str)
    }

    pub fn user_index(&self, id: &str) -> Option<usize> {
        self.users.get_index_of(id)
    }

    pub fn note_index(&self, id: &str) -> Option<usize> {
        self.notes.get_index_of(id)
    }

    pub fn user_ids(&self) -> impl ExactSizeIterator<Item = &str> {
        self.users.iter().map(String::as_str)
    }

    pub fn note_ids(&self) -> impl ExactSizeIterator<Item = &str> {
        self.notes.iter().map(String::as_str)
    }

    /// Votes with their external identifiers, in dataset order.
    pub fn iter_votes(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.votes
            .iter()
            .map(move |v| (self.users[v.user].as_str(), self.notes[v.note].as_str(), v.rating))
    }

    /// Number of votes cast by each user, indexed densely.
    pub fn user_vote_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_users()];
        for v in &self.votes {
            counts[v.user] += 1;
        }
        counts
    }

    /// Number of votes received by each note, indexed densely.
    pub fn note_vote_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_notes()];
        for v in &self.votes {
            counts[v.note] += 1;
        }
        counts
    }

    /// Reopens the dataset for appending. Existing layout is preserved.
    pub fn to_builder(&self, policy: DuplicatePolicy) -> DatasetBuilder {
        let seen = self
            .votes
            .iter()
            .enumerate()
            .map(|(pos, v)| ((v.user, v.note), pos))
            .collect();
        DatasetBuilder {
            data: self.clone(),
            seen,
            policy,
        }
    }
}

/// Incremental construction of a [`RatingsDataset`].
///
/// Users and notes may be registered ahead of any votes; such entities keep
/// their index even when they never receive a vote.
#[derive(Debug, Clone)]
pub struct DatasetBuilder {
    data: RatingsDataset,
    seen: HashMap<(usize, usize), usize>,
    policy: DuplicatePolicy,
}

impl DatasetBuilder {
    pub fn new(policy: DuplicatePolicy) -> Self {
        DatasetBuilder {
            data: RatingsDataset::default(),
            seen: HashMap::new(),
            policy,
        }
    }

    pub fn add_user(&mut self, id: &str) -> Result<usize> {
        validate_id(id)?;
        Ok(intern(&mut self.data.users, id))
    }

    pub fn add_note(&mut self, id: &str) -> Result<usize> {
        validate_id(id)?;
        Ok(intern(&mut self.data.notes, id))
    }

    pub fn push(&mut self, user_id: &str, note_id: &str, rating: f64) -> Result<()> {
        self.push_at(user_id, note_id, rating, None)
    }

    /// Like [`push`](Self::push) but tags errors with a source line number.
    pub fn push_at(&mut self, user_id: &str, note_id: &str, rating: f64, line: Option<usize>) -> Result<()> {
        check_rating(rating, line)?;
        validate_id(user_id)?;
        validate_id(note_id)?;
        // Check for duplicates before interning so a rejected vote leaves no trace.
        if let (Some(u), Some(n)) = (
            self.data.users.get_index_of(user_id),
            self.data.notes.get_index_of(note_id),
        ) {
            if let Some(&pos) = self.seen.get(&(u, n)) {
                return match self.policy {
                    DuplicatePolicy::Reject => Err(Error::DuplicateVote {
                        user: user_id.to_owned(),
                        note: note_id.to_owned(),
                        line,
                    }),
                    DuplicatePolicy::LastWriteWins => {
                        self.data.votes[pos].rating = rating;
                        Ok(())
                    }
                };
            }
        }
        let user = intern(&mut self.data.users, user_id);
        let note = intern(&mut self.data.notes, note_id);
        self.seen.insert((user, note), self.data.votes.len());
        self.data.votes.push(IndexedVote { user, note, rating });
        Ok(())
    }

    pub fn num_votes(&self) -> usize {
        self.data.votes.len()
    }

    pub fn finish(self) -> RatingsDataset {
        self.data
    }
}

fn intern(set: &mut IndexSet<String>, id: &str) -> usize {
    match set.get_index_of(id) {
        Some(i) => i,
        None => set.insert_full(id.to_owned()).0,
    }
}

fn check_rating(rating: f64, line: Option<usize>) -> Result<()> {
    if rating.is_finite() && (-1.0..=1.0).contains(&rating) {
        Ok(())
    } else {
        Err(Error::RatingRange { value: rating, line })
    }
}

/// Identifiers must be representable in the tab-separated file formats.
pub fn validate_id(id: &str) -> Result<()> {
    let reason = if id.is_empty() {
        "empty"
    } else if id.contains(['\t', '\n', '\r']) {
        "contains tab or line break"
    } else if id != id.trim() {
        "leading or trailing whitespace"
    } else {
        return Ok(());
    };
    Err(Error::InvalidId {
        id: id.to_owned(),
        reason,
    })
}
