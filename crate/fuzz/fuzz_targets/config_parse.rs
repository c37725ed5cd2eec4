#![no_main]

use libfuzzer_sys::fuzz_target;
use slvw_core::config::{validate, Experiment, ExperimentConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let diags = validate(&cfg);
        // resolve must agree with validate
        assert_eq!(diags.is_empty(), Experiment::resolve(&cfg).is_ok());
        let _ = cfg.to_toml();
    }
});
