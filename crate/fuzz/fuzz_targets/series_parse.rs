//! Indicator stores are re-read by later pipeline stages and may be edited
//! or truncated externally; the reader must fail cleanly on arbitrary bytes.
//!
//! Run with: cargo +nightly fuzz run series_parse
#![no_main]
use libfuzzer_sys::fuzz_target;
use std::path::Path;

fuzz_target!(|data: &[u8]| {
    let _ = henon_harness::store::parse_series(data, Path::new("fuzz.csv"));
});
