#![no_main]

use cgl_core::config::parse_run_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_run_config(text) {
        // Anything that parsed must also survive validation without panicking.
        let _ = cfg.validate();
    }
});
