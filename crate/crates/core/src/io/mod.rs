//! Tab-separated text formats for votes, parameters, scores and ground truth,
//! plus an adapter for the public notes-ratings dump.
//!
//! Every parser takes raw bytes and reports malformed input as an [`Error`]
//! carrying the 1-based line number; none of them panic.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

mod params;
mod public;
mod scores;
mod truth;
mod votes;

pub use params::{params_to_string, parse_params, read_params, write_params, LabeledParams};
pub use public::{convert_public_data, convert_public_ratings, ConvertMode, ConvertStats};
pub use scores::{parse_scores, read_scores, scores_to_string, write_scores, ScoreRow};
pub use truth::{parse_truth, read_truth, truth_to_string, write_truth};
pub use votes::{parse_votes, read_votes, read_votes_with, votes_to_string, write_votes};

/// Formats a real with 17 significant digits, enough to round-trip any f64.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_real(field: &str, line: usize, what: &str) -> Result<f64> {
    let x: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {field:?}")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("non-finite {what} {field:?}")));
    }
    Ok(x)
}

pub(crate) fn parse_count(field: &str, line: usize, what: &str) -> Result<usize> {
    // usize::from_str accepts a leading '+', which the writers never emit.
    if !field.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(line, format!("invalid {what} {field:?}")));
    }
    field
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} {field:?}")))
}

/// Decodes UTF-8, pointing at the offending line on failure.
pub(crate) fn decode(bytes: &[u8]) -> Result<&str> {
    std::str::from_utf8(bytes).map_err(|e| {
        let line = 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        Error::parse(line, "invalid UTF-8")
    })
}

/// Numbered lines of an LF-terminated file. A single trailing newline does
/// not produce an empty final line.
pub(crate) fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let empty = text.is_empty();
    body.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(move |_| !empty)
}

/// Splits a row into exactly `N` tab-separated fields.
pub(crate) fn fields<const N: usize>(line: &str, lineno: usize) -> Result<[&str; N]> {
    let mut out = [""; N];
    let mut parts = line.split('\t');
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = parts
            .next()
            .ok_or_else(|| Error::parse(lineno, format!("expected {N} fields, found {i}")))?;
    }
    if parts.next().is_some() {
        let n = line.split('\t').count();
        return Err(Error::parse(lineno, format!("expected {N} fields, found {n}")));
    }
    Ok(out)
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_format_round_trips() {
        for x in [
            0.0,
            -0.0,
            1.0,
            -1.0,
            0.1,
            1.0 / 3.0,
            6.02e23,
            -2.5e-300,
            f64::MIN_POSITIVE,
            f64::MAX,
        ] {
            let s = format_real(x);
            let y = parse_real(&s, 1, "x").unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{s}");
        }
        assert_eq!(format_real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn real_rejects_non_finite() {
        for s in ["nan", "inf", "-inf", "NaN", "", "1,0", "0x1"] {
            assert!(parse_real(s, 3, "x").is_err(), "{s}");
        }
    }

    #[test]
    fn line_splitting() {
        let v: Vec<_> = numbered_lines("a\nb\n").collect();
        assert_eq!(v, [(1, "a"), (2, "b")]);
        let v: Vec<_> = numbered_lines("a\n\nb").collect();
        assert_eq!(v, [(1, "a"), (2, ""), (3, "b")]);
        assert_eq!(numbered_lines("").count(), 0);
    }

    #[test]
    fn field_count_checked() {
        assert_eq!(fields::<3>("a\tb\tc", 1).unwrap(), ["a", "b", "c"]);
        assert!(fields::<3>("a\tb", 1).is_err());
        assert!(fields::<3>("a\tb\tc\td", 1).is_err());
    }

    #[test]
    fn utf8_error_has_line() {
        match decode(b"ok\nok\n\xff") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counts_are_plain_digits() {
        assert_eq!(parse_count("42", 1, "n").unwrap(), 42);
        for s in ["+1", "-1", "", "1.0", "99999999999999999999999"] {
            assert!(parse_count(s, 1, "n").is_err(), "{s}");
        }
    }
}
