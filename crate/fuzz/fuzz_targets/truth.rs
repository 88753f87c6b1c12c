#![no_main]

use bridging_core::io::{parse_truth, truth_to_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(truth) = parse_truth(data) {
        let again = parse_truth(truth_to_string(&truth).as_bytes()).expect("written truth parses");
        assert_eq!(again, truth);
    }
});
