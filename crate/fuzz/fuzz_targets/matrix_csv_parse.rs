#![no_main]

use libfuzzer_sys::fuzz_target;
use risbf_core::matrix_io::{parse_csv, write_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_csv(text) {
        let back = parse_csv(&write_csv(&m)).expect("written csv parses");
        assert_eq!(back.shape(), m.shape());
        for (a, b) in m.iter().zip(back.iter()) {
            // NaN payloads survive as NaN, not bit-for-bit.
            assert!(a == b || (a.re.is_nan() || a.im.is_nan()));
        }
    }
});
