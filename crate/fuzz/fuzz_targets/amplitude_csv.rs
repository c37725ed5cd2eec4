#![no_main]

use libfuzzer_sys::fuzz_target;
use slvw_core::io::read_amplitude_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_amplitude_csv(data);
});
