#![no_main]

use harvest_core::io::{format_ideals_csv, parse_ideals};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((tensor, nadir)) = parse_ideals(text) {
        let again =
            parse_ideals(&format_ideals_csv(&tensor, nadir.as_deref())).expect("round trip");
        assert_eq!(again.0.len(), tensor.len());
    }
});
