#![no_main]

use libfuzzer_sys::fuzz_target;
use mhdl::io::{decode_snapshot, encode_snapshot};

fuzz_target!(|data: &[u8]| {
    // The table may come in any order; the canonical encoding is a fixed point.
    if let Ok(state) = decode_snapshot(data) {
        let bytes = encode_snapshot(&state);
        let again = decode_snapshot(&bytes).expect("canonical encoding decodes");
        assert_eq!(encode_snapshot(&again), bytes);
    }
});
