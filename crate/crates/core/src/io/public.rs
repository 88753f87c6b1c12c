use std::path::Path;
use std::str::FromStr;

use super::{decode, numbered_lines, read_file, votes::votes_to_string, write_file};
use crate::dataset::{DatasetBuilder, DuplicatePolicy, RatingsDataset};
use crate::error::{Error, Result};

/// How intermediate helpfulness levels are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvertMode {
    /// Keep only HELPFUL (+1) and NOT_HELPFUL (-1).
    #[default]
    Drop,
    /// Additionally map SOMEWHAT_HELPFUL to 0.
    Tri,
}

impl FromStr for ConvertMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "drop" => Ok(ConvertMode::Drop),
            "tri" => Ok(ConvertMode::Tri),
            other => Err(format!("unknown conversion mode {other:?} (expected drop or tri)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConvertStats {
    pub kept: usize,
    pub dropped_somewhat: usize,
    /// Rows whose helpfulness level is empty or unrecognized.
    pub dropped_unknown: usize,
}

const NOTE_COL: &str = "noteId";
const RATER_COL: &str = "raterParticipantId";
const LEVEL_COL: &str = "helpfulnessLevel";

/// Maps a public ratings dump to votes. Other columns are ignored.
pub fn convert_public_ratings(bytes: &[u8], mode: ConvertMode) -> Result<(RatingsDataset, ConvertStats)> {
    let text = decode(bytes)?;
    let mut lines = numbered_lines(text);
    let Some((_, header)) = lines.next() else {
        return Err(Error::Schema("empty ratings file".into()));
    };
    let columns: Vec<&str> = header.split('\t').collect();
    let find = |name: &str| {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Schema(format!("missing required column {name:?}")))
    };
    let (note_col, rater_col, level_col) = (find(NOTE_COL)?, find(RATER_COL)?, find(LEVEL_COL)?);

    let mut b = DatasetBuilder::new(DuplicatePolicy::Reject);
    let mut stats = ConvertStats::default();
    for (n, line) in lines {
        let row: Vec<&str> = line.split('\t').collect();
        if row.len() != columns.len() {
            return Err(Error::parse(
                n,
                format!("expected {} fields, found {}", columns.len(), row.len()),
            ));
        }
        let rating = match (row[level_col], mode) {
            ("HELPFUL", _) => 1.0,
            ("NOT_HELPFUL", _) => -1.0,
            ("SOMEWHAT_HELPFUL", ConvertMode::Tri) => 0.0,
            ("SOMEWHAT_HELPFUL", ConvertMode::Drop) => {
                stats.dropped_somewhat += 1;
                continue;
            }
            _ => {
                stats.dropped_unknown += 1;
                continue;
            }
        };
        b.push_at(row[rater_col], row[note_col], rating, Some(n))
            .map_err(|e| match e {
                Error::InvalidId { id, reason } => Error::parse(n, format!("invalid identifier {id:?}: {reason}")),
                other => other,
            })?;
        stats.kept += 1;
    }
    Ok((b.finish(), stats))
}

/// Converts the ratings file at `ratings_path` and writes a vote file to `out_path`.
pub fn convert_public_data(
    ratings_path: impl AsRef<Path>,
    out_path: impl AsRef<Path>,
    mode: ConvertMode,
) -> Result<ConvertStats> {
    let (data, stats) = convert_public_ratings(&read_file(ratings_path.as_ref())?, mode)?;
    write_file(out_path.as_ref(), &votes_to_string(&data))?;
    Ok(stats)
}
