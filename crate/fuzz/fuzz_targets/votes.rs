//! Vote files: no panics, and anything accepted survives a write/read cycle.

#![no_main]

use bridging_core::io::{parse_votes, votes_to_string};
use bridging_core::DuplicatePolicy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_votes(data, DuplicatePolicy::LastWriteWins);
    if let Ok(parsed) = parse_votes(data, DuplicatePolicy::Reject) {
        let text = votes_to_string(&parsed);
        let again = parse_votes(text.as_bytes(), DuplicatePolicy::Reject).expect("written votes parse");
        assert_eq!(votes_to_string(&again), text);
    }
});
