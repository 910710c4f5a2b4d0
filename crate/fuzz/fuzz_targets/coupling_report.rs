#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = cgl_core::io::read_coupling_report(data) {
        let _ = report.passed();
    }
});
