#![no_main]

use joinery_core::io::{parse_system, system_to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sys) = parse_system(text) {
        // Accepted input must survive a round trip.
        let again = parse_system(&system_to_json(&sys).to_string()).expect("round trip parses");
        assert_eq!(again.weights(), sys.weights());
        assert_eq!(again.maps(), sys.maps());
    }
});
