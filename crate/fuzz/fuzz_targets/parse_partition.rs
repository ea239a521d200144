#![no_main]

use joinery_core::corpus::z5_square;
use joinery_core::io::parse_partition;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_partition(text, &z5_square());
    }
});
