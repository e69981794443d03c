//! Config files come from users: parsing plus validation must reject bad
//! input with errors, never panic.
//!
//! Run with: cargo +nightly fuzz run config_parse
#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = henon_harness::config::ExperimentConfig::from_toml_str(text);
    }
});
