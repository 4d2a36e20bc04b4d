#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = mhdl::config::parse_config(text) {
            // A parsed config always describes a valid grid and step count.
            cfg.grid().expect("grid checked by the parser");
            cfg.steps().expect("steps checked by the parser");
        }
    }
});
