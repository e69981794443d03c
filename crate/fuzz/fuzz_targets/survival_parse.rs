//! The survival table feeds the indicator stage; arbitrary bytes must never
//! panic the reader.
//!
//! Run with: cargo +nightly fuzz run survival_parse
#![no_main]
use libfuzzer_sys::fuzz_target;
use std::path::Path;

fuzz_target!(|data: &[u8]| {
    let _ = henon_harness::store::parse_survival(data, Path::new("fuzz.csv"));
});
