#![no_main]

use harvest_service::parse_journal;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = parse_journal(text) {
        for (n, r) in records.iter().enumerate() {
            assert_eq!(r.seq, n as u64 + 1);
        }
    }
});
