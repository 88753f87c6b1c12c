use std::collections::HashSet;
use std::fmt::Write;
use std::path::Path;

use super::{decode, fields, format_real, numbered_lines, parse_count, parse_real, read_file, write_file};
use crate::dataset::validate_id;
use crate::error::{Error, Result};
use crate::scoring::{NoteScore, NoteStatus};

const SCORES_HEADER: &str = "note_id\tintercept\tfactor\tvote_count\tstatus\trank";

/// One line of a score report. Ranks start at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub score: NoteScore,
    pub status: NoteStatus,
    pub rank: usize,
}

/// Writes scores in the given order, ranked by position.
pub fn scores_to_string(scores: &[NoteScore], statuses: &[NoteStatus]) -> Result<String> {
    if scores.len() != statuses.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores but {} statuses",
            scores.len(),
            statuses.len()
        )));
    }
    let mut out = String::new();
    out.push_str(SCORES_HEADER);
    out.push('\n');
    for (i, (s, st)) in scores.iter().zip(statuses).enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.note_id,
            format_real(s.intercept),
            format_real(s.factor),
            s.vote_count,
            st,
            i + 1
        );
    }
    Ok(out)
}

pub fn parse_scores(bytes: &[u8]) -> Result<Vec<ScoreRow>> {
    let text = decode(bytes)?;
    let mut lines = numbered_lines(text);
    match lines.next() {
        Some((_, SCORES_HEADER)) => {}
        Some((n, other)) => {
            return Err(Error::parse(
                n,
                format!("expected header {SCORES_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(Error::parse(1, "missing header")),
    }
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in lines {
        let [id, intercept, factor, count, status, rank] = fields::<6>(line, n)?;
        validate_id(id).map_err(|e| Error::parse(n, e.to_string()))?;
        if !seen.insert(id) {
            return Err(Error::parse(n, format!("duplicate note {id:?}")));
        }
        rows.push(ScoreRow {
            score: NoteScore {
                note_id: id.to_owned(),
                intercept: parse_real(intercept, n, "intercept")?,
                factor: parse_real(factor, n, "factor")?,
                vote_count: parse_count(count, n, "vote count")?,
            },
            status: status.parse().map_err(|e: String| Error::parse(n, e))?,
            rank: parse_count(rank, n, "rank")?,
        });
    }
    Ok(rows)
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<ScoreRow>> {
    parse_scores(&read_file(path.as_ref())?)
}

pub fn write_scores(scores: &[NoteScore], statuses: &[NoteStatus], path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &scores_to_string(scores, statuses)?)
}
