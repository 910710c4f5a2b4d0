#![no_main]

use cgl_core::config::{parse_alpha_degrees, parse_r_ladder};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ladder) = parse_r_ladder(s) {
        assert!(!ladder.is_empty());
        assert!(ladder.iter().all(|r| r.is_finite() && *r > 0.0));
    }
    if let Ok(alpha) = parse_alpha_degrees(s) {
        assert!((0.0..=90.0).contains(&alpha));
    }
});
