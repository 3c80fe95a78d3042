//! Differential target: anything the parser accepts must serialize to a
//! canonical form that reparses to the identical value tree.

#![no_main]

use eblab_cli::config::{parse_config, serialize_config};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v1) = parse_config(text) {
            let canonical = serialize_config(&v1);
            let v2 = parse_config(&canonical).expect("canonical serialization must reparse");
            assert_eq!(v1, v2, "round-trip changed the value tree");
        }
    }
});
