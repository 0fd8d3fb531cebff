#![no_main]
//! Input: instance header, a NUL byte, then the stand table.

use harvest_core::io::{format_instance, parse_instance};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else {
        return;
    };
    let (Ok(header), Ok(table)) = (
        std::str::from_utf8(&data[..split]),
        std::str::from_utf8(&data[split + 1..]),
    ) else {
        return;
    };
    if let Ok(inst) = parse_instance(header, table) {
        let (h, t) = format_instance(&inst, "stands.csv").expect("valid instance formats");
        assert_eq!(
            parse_instance(&h, &t).expect("formatted instance parses"),
            inst
        );
    }
});
