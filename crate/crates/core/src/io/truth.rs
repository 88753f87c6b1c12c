use std::fmt::Write;
use std::path::Path;

use super::{decode, fields, numbered_lines, read_file, write_file};
use crate::dataset::validate_id;
use crate::error::{Error, Result};
use crate::sim::GroundTruth;

const TRUTH_HEADER: &str = "entity\tid\tlabel";

/// Users (with their group) first, then notes (with their archetype).
pub fn truth_to_string(truth: &GroundTruth) -> String {
    let mut out = String::new();
    out.push_str(TRUTH_HEADER);
    out.push('\n');
    for (id, group) in &truth.user_group {
        let _ = writeln!(out, "user\t{id}\t{group}");
    }
    for (id, arch) in &truth.note_archetype {
        let _ = writeln!(out, "note\t{id}\t{arch}");
    }
    out
}

pub fn parse_truth(bytes: &[u8]) -> Result<GroundTruth> {
    let text = decode(bytes)?;
    let mut lines = numbered_lines(text);
    match lines.next() {
        Some((_, TRUTH_HEADER)) => {}
        Some((n, other)) => {
            return Err(Error::parse(
                n,
                format!("expected header {TRUTH_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(Error::parse(1, "missing header")),
    }
    let mut truth = GroundTruth::default();
    for (n, line) in lines {
        let [kind, id, label] = fields::<3>(line, n)?;
        validate_id(id).map_err(|e| Error::parse(n, e.to_string()))?;
        let fresh = match kind {
            "user" => {
                let group = label.parse().map_err(|e: String| Error::parse(n, e))?;
                truth.user_group.insert(id.to_owned(), group).is_none()
            }
            "note" => {
                let arch = label.parse().map_err(|e: String| Error::parse(n, e))?;
                truth.note_archetype.insert(id.to_owned(), arch).is_none()
            }
            other => return Err(Error::parse(n, format!("unknown entity kind {other:?}"))),
        };
        if !fresh {
            return Err(Error::parse(n, format!("duplicate {kind} {id:?}")));
        }
    }
    Ok(truth)
}

pub fn read_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    parse_truth(&read_file(path.as_ref())?)
}

pub fn write_truth(truth: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &truth_to_string(truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate, SimulationConfig};

    #[test]
    fn round_trip_generated() {
        let cfg = SimulationConfig {
            users_per_group: 5,
            notes_per_archetype: [2, 1, 1],
            votes_per_note: 4,
            ..Default::default()
        };
        let (_, truth) = generate(&cfg).unwrap();
        let text = truth_to_string(&truth);
        assert!(text.starts_with("entity\tid\tlabel\nuser\tu0000\tA\n"));
        assert!(text.contains("note\tn0003\tPARTISAN_B\n"));
        assert_eq!(parse_truth(text.as_bytes()).unwrap(), truth);
    }

    #[test]
    fn bad_rows() {
        let h = TRUTH_HEADER;
        for bad in [
            format!("{h}\nuser\tu\tC\n"),
            format!("{h}\nnote\tn\tBRIDGE\n"),
            format!("{h}\npost\tp\tA\n"),
            format!("{h}\nuser\tu\tA\nuser\tu\tB\n"),
            "entity\tid\n".to_owned(),
        ] {
            assert!(parse_truth(bad.as_bytes()).is_err(), "{bad:?}");
        }
    }
}
