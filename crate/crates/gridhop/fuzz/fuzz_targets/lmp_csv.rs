#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = gridhop::io::lmp::parse_lmp_csv(data);
});
