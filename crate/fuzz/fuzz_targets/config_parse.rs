#![no_main]

use bslab_core::config::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::parse(text) {
        // Accepted configs serialize back to something that parses to the same value.
        let again = serde_json::to_string(&config).unwrap();
        let reparsed = ExperimentConfig::parse(&again).expect("re-serialized config parses");
        assert_eq!(reparsed.hash(), config.hash());
    }
});
