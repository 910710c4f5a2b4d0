#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = cgl_core::io::read_trajectory_jsonl(data);
});
