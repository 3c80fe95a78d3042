//! Fuzz the configuration parser and the typed extraction behind it.
//!
//! Config files are the only untrusted structured input the binary ingests.
//! Neither the parser nor `ExperimentConfig::from_values` may panic, loop, or
//! recurse unboundedly on arbitrary bytes.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(values) = eblab_cli::config::parse_config(text) {
            let _ = eblab_cli::experiment::ExperimentConfig::from_values(&values);
        }
    }
});
