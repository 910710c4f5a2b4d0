#![no_main]

use cgl_core::io::{read_angle_csv, read_coalescence_csv, read_deviation_csv};
use libfuzzer_sys::fuzz_target;

// The three per-seed sample tables share one corpus; the first byte picks the reader.
fuzz_target!(|data: &[u8]| {
    let Some((&tag, rest)) = data.split_first() else {
        return;
    };
    match tag % 3 {
        0 => drop(read_angle_csv(rest)),
        1 => drop(read_deviation_csv(rest)),
        _ => drop(read_coalescence_csv(rest)),
    }
});
