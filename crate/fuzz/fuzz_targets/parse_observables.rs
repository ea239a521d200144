#![no_main]

use joinery_core::io::{observable_to_json, parse_observable, parse_observables};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_observable(text) {
        let again = parse_observable(&observable_to_json(&f).to_string()).expect("round trip parses");
        assert_eq!(again, f);
    }
    let _ = parse_observables(text);
});
