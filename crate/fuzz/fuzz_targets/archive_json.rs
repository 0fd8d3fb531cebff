#![no_main]

use harvest_core::io::parse_archive;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(archive) = parse_archive(text) {
        let json = serde_json::to_string(&archive).expect("archive serializes");
        let again = parse_archive(&json).expect("serialized archive parses");
        assert_eq!(again.ids(), archive.ids());
    }
});
