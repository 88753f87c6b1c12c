#![no_main]

use bridging_cli::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let echoed = cfg.echo();
        assert_eq!(ExperimentConfig::parse(&echoed).expect("echo parses"), cfg);
    }
});
