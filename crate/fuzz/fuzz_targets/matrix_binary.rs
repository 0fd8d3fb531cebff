#![no_main]

use harvest_core::io::{decode_matrix, encode_matrix};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = decode_matrix(data) {
        let (n, s, k) = m.shape();
        assert_eq!(m.values.len(), n * s * k);
        // values may be NaN, so compare the encoding rather than the matrix
        assert_eq!(encode_matrix(&m), data);
    }
});
