#![no_main]

use bridging_core::io::{params_to_string, parse_params};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(parsed) = parse_params(data) {
        let text = params_to_string(&parsed).expect("parsed params are consistent");
        let again = parse_params(text.as_bytes()).expect("written params parse");
        assert_eq!(again, parsed);
    }
});
