use std::fmt::Write;
use std::path::Path;

use super::{decode, fields, numbered_lines, read_file, write_file};
use crate::dataset::{DatasetBuilder, DuplicatePolicy, RatingsDataset};
use crate::error::{Error, Result};

pub(crate) const VOTES_HEADER: &str = "user_id\tnote_id\trating";

/// `1` and `-1` are written bare; any other rating uses the shortest
/// representation that parses back to the same value.
pub(crate) fn format_rating(r: f64) -> String {
    if r == 1.0 {
        "1".to_owned()
    } else if r == -1.0 {
        "-1".to_owned()
    } else {
        format!("{r:?}")
    }
}

fn parse_rating(field: &str, line: usize) -> Result<f64> {
    let r: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid rating {field:?}")))?;
    if r.is_finite() && (-1.0..=1.0).contains(&r) {
        Ok(r)
    } else {
        Err(Error::RatingRange {
            value: r,
            line: Some(line),
        })
    }
}

pub fn parse_votes(bytes: &[u8], policy: DuplicatePolicy) -> Result<RatingsDataset> {
    let text = decode(bytes)?;
    let mut lines = numbered_lines(text);
    match lines.next() {
        Some((_, VOTES_HEADER)) => {}
        Some((n, other)) => {
            return Err(Error::parse(
                n,
                format!("expected header {VOTES_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(Error::parse(1, "missing header")),
    }
    let mut b = DatasetBuilder::new(policy);
    for (n, line) in lines {
        let [user, note, rating] = fields::<3>(line, n)?;
        let rating = parse_rating(rating, n)?;
        b.push_at(user, note, rating, Some(n)).map_err(|e| match e {
            Error::InvalidId { id, reason } => Error::parse(n, format!("invalid identifier {id:?}: {reason}")),
            other => other,
        })?;
    }
    Ok(b.finish())
}

pub fn votes_to_string(data: &RatingsDataset) -> String {
    let mut out = String::with_capacity(32 * (data.num_votes() + 1));
    out.push_str(VOTES_HEADER);
    out.push('\n');
    for (user, note, rating) in data.iter_votes() {
        let _ = writeln!(out, "{user}\t{note}\t{}", format_rating(rating));
    }
    out
}

/// Reads a vote file, rejecting duplicate (user, note) pairs.
pub fn read_votes(path: impl AsRef<Path>) -> Result<RatingsDataset> {
    read_votes_with(path, DuplicatePolicy::Reject)
}

pub fn read_votes_with(path: impl AsRef<Path>, policy: DuplicatePolicy) -> Result<RatingsDataset> {
    let path = path.as_ref();
    parse_votes(&read_file(path)?, policy)
}

pub fn write_votes(data: &RatingsDataset, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &votes_to_string(data))
}
