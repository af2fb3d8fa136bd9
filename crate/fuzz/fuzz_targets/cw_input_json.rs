#![no_main]

use cubar::cwcalc::CWHomologyInput;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(input) = CWHomologyInput::from_json(data) {
        let wire = input.to_json();
        let again = CWHomologyInput::from_json(&wire).expect("serialized input must parse");
        assert_eq!(wire, again.to_json());
    }
});
