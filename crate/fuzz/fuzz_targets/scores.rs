#![no_main]

use bridging_core::io::{parse_scores, scores_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_scores(data) {
        let scores: Vec<_> = rows.iter().map(|r| r.score.clone()).collect();
        let statuses: Vec<_> = rows.iter().map(|r| r.status).collect();
        let text = scores_to_string(&scores, &statuses).expect("lengths match");
        let again = parse_scores(text.as_bytes()).expect("written scores parse");
        assert_eq!(again.len(), rows.len());
        for (a, b) in again.iter().zip(&rows) {
            assert_eq!(a.score, b.score);
            assert_eq!(a.status, b.status);
        }
    }
});
