#![no_main]

use cubar::gridmodel::{model_to_json, parse_model};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // Parsing may reject the input, but must not panic; whatever it accepts
    // has to survive a serialize/parse round trip unchanged.
    if let Ok(pair) = parse_model(data) {
        let wire = model_to_json(&pair.space, pair.sub.as_ref());
        let again = parse_model(&wire).expect("serialized model must parse");
        assert_eq!(wire, model_to_json(&again.space, again.sub.as_ref()));
    }
});
