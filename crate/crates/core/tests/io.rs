mod common;

use std::path::PathBuf;

use common::{arb_system, arb_system_with_observable};
use joinery_core::corpus::z5_square;
use joinery_core::io::{
    coupling_to_json, observable_to_json, parse_coupling_inline, parse_labels, parse_observable, parse_observables,
    parse_partition, parse_system, system_to_json,
};
use joinery_core::joinings::furstenberg_self_joining;
use joinery_core::rational::{format_fraction, parse_fraction, rat};
use proptest::prelude::*;

/// Every checked-in fuzz seed for `target`, as text.
fn seeds(target: &str) -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<String> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| std::fs::read_to_string(e.unwrap().path()).unwrap())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn fuzz_seeds_parse_without_panicking() {
    let accepted = seeds("parse_system").iter().filter(|s| parse_system(s).is_ok()).count();
    assert!(accepted >= 2);
    assert!(seeds("parse_labels").iter().any(|s| parse_labels(s).is_ok()));
    assert!(seeds("parse_labels").iter().any(|s| parse_labels(s).is_err()));
    let sq = z5_square();
    assert!(seeds("parse_partition").iter().all(|s| parse_partition(s, &sq).is_ok()));
    assert!(seeds("parse_observables").iter().all(|s| parse_observables(s).is_ok()));
    assert!(seeds("parse_coupling").iter().all(|s| parse_coupling_inline(s).is_ok()));
    for s in seeds("parse_fraction") {
        if let Ok(q) = parse_fraction(&s) {
            assert_eq!(parse_fraction(&format_fraction(&q)).unwrap(), q);
        }
    }
}

#[test]
fn fractions_are_canonical() {
    assert_eq!(parse_fraction("10/4").unwrap(), rat(5, 2));
    assert_eq!(format_fraction(&rat(10, 4)), "5/2");
    for bad in ["1/0", "x", "", "0.5", "1/2/3"] {
        assert!(parse_fraction(bad).is_err(), "{bad:?}");
    }
}

proptest! {
    #[test]
    fn system_json_round_trips(sys in arb_system()) {
        let back = parse_system(&system_to_json(&sys).to_string()).unwrap();
        prop_assert_eq!(back.weights(), sys.weights());
        prop_assert_eq!(back.maps(), sys.maps());
    }

    #[test]
    fn observable_json_round_trips((_, f) in arb_system_with_observable()) {
        prop_assert_eq!(parse_observable(&observable_to_json(&f).to_string()).unwrap(), f);
    }

    #[test]
    fn coupling_json_round_trips(sys in arb_system()) {
        let lam = furstenberg_self_joining(&sys).unwrap();
        let back = parse_coupling_inline(&coupling_to_json(&lam).to_string()).unwrap();
        prop_assert_eq!(back.masses(), lam.masses());
    }

    #[test]
    fn fraction_text_round_trips(num in -10_000i64..10_000, den in 1i64..10_000) {
        let q = rat(num, den);
        prop_assert_eq!(parse_fraction(&format_fraction(&q)).unwrap(), q);
    }

    #[test]
    fn arbitrary_text_never_panics(text in ".{0,64}") {
        let _ = parse_system(&text);
        let _ = parse_labels(&text);
        let _ = parse_observables(&text);
        let _ = parse_coupling_inline(&text);
        let _ = parse_fraction(&text);
    }
}
