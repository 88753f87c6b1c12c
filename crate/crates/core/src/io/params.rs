use std::collections::HashSet;
use std::fmt::Write;
use std::path::Path;

use super::{decode, fields, format_real, numbered_lines, parse_real, read_file, write_file};
use crate::dataset::{validate_id, RatingsDataset};
use crate::error::{Error, Result};
use crate::model::ModelParams;

const USERS_HEADER: &str = "user_id\tintercept\tfactor";
const NOTES_HEADER: &str = "note_id\tintercept\tfactor";

/// Parameters together with the identifiers they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledParams {
    pub user_ids: Vec<String>,
    pub note_ids: Vec<String>,
    pub params: ModelParams,
}

impl LabeledParams {
    pub fn from_dataset(data: &RatingsDataset, params: ModelParams) -> Result<Self> {
        params.check_dims(data)?;
        Ok(LabeledParams {
            user_ids: data.user_ids().map(str::to_owned).collect(),
            note_ids: data.note_ids().map(str::to_owned).collect(),
            params,
        })
    }

    /// Reorders the parameters to match `data`'s dense indices.
    ///
    /// Every user and note of the dataset must be present; extra entries are
    /// ignored.
    pub fn align_to(&self, data: &RatingsDataset) -> Result<ModelParams> {
        let mut out = ModelParams::zeros(data.num_users(), data.num_notes());
        let mut filled_users = vec![false; data.num_users()];
        let mut filled_notes = vec![false; data.num_notes()];
        for (i, id) in self.user_ids.iter().enumerate() {
            if let Some(u) = data.user_index(id) {
                out.user_intercepts[u] = self.params.user_intercepts[i];
                out.user_factors[u] = self.params.user_factors[i];
                filled_users[u] = true;
            }
        }
        for (i, id) in self.note_ids.iter().enumerate() {
            if let Some(n) = data.note_index(id) {
                out.note_intercepts[n] = self.params.note_intercepts[i];
                out.note_factors[n] = self.params.note_factors[i];
                filled_notes[n] = true;
            }
        }
        if let Some(u) = filled_users.iter().position(|f| !f) {
            return Err(Error::Contract(format!(
                "no parameters for user {:?}",
                data.user_id(u).unwrap_or_default()
            )));
        }
        if let Some(n) = filled_notes.iter().position(|f| !f) {
            return Err(Error::Contract(format!(
                "no parameters for note {:?}",
                data.note_id(n).unwrap_or_default()
            )));
        }
        Ok(out)
    }

    fn check(&self) -> Result<()> {
        self.params.check_shape()?;
        if self.user_ids.len() != self.params.num_users() || self.note_ids.len() != self.params.num_notes() {
            return Err(Error::DimensionMismatch(format!(
                "{} user ids and {} note ids for {}x{} parameters",
                self.user_ids.len(),
                self.note_ids.len(),
                self.params.num_users(),
                self.params.num_notes()
            )));
        }
        Ok(())
    }
}

/// Users section followed by notes section, each introduced by its header.
pub fn params_to_string(p: &LabeledParams) -> Result<String> {
    p.check()?;
    let mut out = String::new();
    out.push_str(USERS_HEADER);
    out.push('\n');
    for (i, id) in p.user_ids.iter().enumerate() {
        let _ = writeln!(
            out,
            "{id}\t{}\t{}",
            format_real(p.params.user_intercepts[i]),
            format_real(p.params.user_factors[i])
        );
    }
    out.push_str(NOTES_HEADER);
    out.push('\n');
    for (i, id) in p.note_ids.iter().enumerate() {
        let _ = writeln!(
            out,
            "{id}\t{}\t{}",
            format_real(p.params.note_intercepts[i]),
            format_real(p.params.note_factors[i])
        );
    }
    Ok(out)
}

pub fn parse_params(bytes: &[u8]) -> Result<LabeledParams> {
    let text = decode(bytes)?;
    let mut lines = numbered_lines(text);
    match lines.next() {
        Some((_, USERS_HEADER)) => {}
        Some((n, other)) => {
            return Err(Error::parse(
                n,
                format!("expected header {USERS_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(Error::parse(1, "missing users header")),
    }

    let mut out = LabeledParams {
        user_ids: Vec::new(),
        note_ids: Vec::new(),
        params: ModelParams::zeros(0, 0),
    };
    let mut in_notes = false;
    let mut seen_users = HashSet::new();
    let mut seen_notes = HashSet::new();
    for (n, line) in lines {
        if line == NOTES_HEADER && !in_notes {
            in_notes = true;
            continue;
        }
        let [id, intercept, factor] = fields::<3>(line, n)?;
        validate_id(id).map_err(|e| Error::parse(n, e.to_string()))?;
        let intercept = parse_real(intercept, n, "intercept")?;
        let factor = parse_real(factor, n, "factor")?;
        let (seen, ids, intercepts, factors) = if in_notes {
            (
                &mut seen_notes,
                &mut out.note_ids,
                &mut out.params.note_intercepts,
                &mut out.params.note_factors,
            )
        } else {
            (
                &mut seen_users,
                &mut out.user_ids,
                &mut out.params.user_intercepts,
                &mut out.params.user_factors,
            )
        };
        if !seen.insert(id.to_owned()) {
            return Err(Error::parse(n, format!("duplicate identifier {id:?}")));
        }
        ids.push(id.to_owned());
        intercepts.push(intercept);
        factors.push(factor);
    }
    if !in_notes {
        return Err(Error::parse(
            text.lines().count() + 1,
            format!("missing notes header {NOTES_HEADER:?}"),
        ));
    }
    Ok(out)
}

pub fn read_params(path: impl AsRef<Path>) -> Result<LabeledParams> {
    parse_params(&read_file(path.as_ref())?)
}

pub fn write_params(p: &LabeledParams, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &params_to_string(p)?)
}
