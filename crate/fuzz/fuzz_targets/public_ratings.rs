//! The public ratings adapter under both conversion modes.

#![no_main]

use bridging_core::io::{convert_public_ratings, parse_votes, votes_to_string, ConvertMode};
use bridging_core::DuplicatePolicy;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for mode in [ConvertMode::Drop, ConvertMode::Tri] {
        if let Ok((votes, stats)) = convert_public_ratings(data, mode) {
            assert_eq!(stats.kept, votes.num_votes());
            let text = votes_to_string(&votes);
            parse_votes(text.as_bytes(), DuplicatePolicy::Reject).expect("converted votes parse");
        }
    }
});
