#![no_main]

use libfuzzer_sys::fuzz_target;

// validate_config parses untrusted experiment files. It must reject bad
// input with a typed error, never panic, and accepted configs must have a
// stable digest (canonicalization is total on valid configs).
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = routelab::harness::validate_config(text) {
        assert_eq!(config.digest(), config.digest());
        assert!(!config.seeds.is_empty(), "defaults must fill the seed list");
        assert!(!config.schemes.is_empty());
        assert!(!config.metrics.is_empty());
    }
});
