#![no_main]

use cubar::coeff::{parse_rational, RingSpec, WeightVector};
use libfuzzer_sys::fuzz_target;

// First line: ring name. Rest: a comma-separated weight list, whose head is
// also fed through the single-element path.
fuzz_target!(|data: &str| {
    let (ring_text, elems_text) = match data.split_once('\n') {
        Some(pair) => pair,
        None => (data, ""),
    };
    let _ = parse_rational(elems_text);
    let Ok(ring) = RingSpec::parse_name(ring_text) else {
        return;
    };
    if let Some(head) = elems_text.split(',').next() {
        if let Ok(elem) = ring.parse_elem(head) {
            // Canonical elements must survive a format/parse round trip.
            let shown = ring.format_elem(&elem);
            let again = ring.parse_elem(&shown).expect("formatted element must parse");
            assert_eq!(ring.format_elem(&again), shown);
        }
    }
    let entries: Result<Vec<_>, _> = elems_text.split(',').map(|t| ring.parse_elem(t)).collect();
    if let Ok(entries) = entries {
        let _ = WeightVector::new(ring, entries);
    }
});
