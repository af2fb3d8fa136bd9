#![no_main]

use cubar::chaincore::{chain_from_json, chain_to_json};
use cubar::coeff::RingSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let rings = [
        RingSpec::Integers,
        RingSpec::Rationals,
        RingSpec::mod_n(6).unwrap(),
    ];
    for ring in rings {
        if let Ok(chain) = chain_from_json(&ring, data) {
            // Accepted chains are canonical, so the wire form must round-trip.
            let wire = chain_to_json(&chain).expect("canonical chain must serialize");
            let again = chain_from_json(&ring, &wire).expect("serialized chain must parse");
            assert_eq!(chain, again);
        }
    }
});
