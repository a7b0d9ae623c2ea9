#![no_main]

use libfuzzer_sys::fuzz_target;
use squeezed_vacuum::cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::from_toml(text) {
            let canonical = cfg.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&canonical).unwrap(), cfg);
        }
    }
});
