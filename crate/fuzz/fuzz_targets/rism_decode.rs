#![no_main]

use libfuzzer_sys::fuzz_target;
use risbf_core::matrix_io::{decode_rism, encode_rism};

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = decode_rism(data) {
        // Anything that decodes must re-encode to the same bytes.
        let again = encode_rism(&m).expect("decoded matrix re-encodes");
        assert_eq!(again, data);
    }
});
