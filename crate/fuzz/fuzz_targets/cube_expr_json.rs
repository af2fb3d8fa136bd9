#![no_main]

use cubar::chaincore::CanonGen;
use cubar::cubeexpr::CubeExpr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let Ok(expr) = serde_json::from_str::<CubeExpr>(data) else {
        return;
    };
    let Ok(canon) = CanonGen::from_expr(&expr) else {
        return;
    };
    // Canonicalization must be idempotent across the wire format.
    let wire = canon.to_expr().expect("canonical generator must serialize");
    let again = CanonGen::from_expr(&wire).expect("canonical expression must parse");
    assert_eq!(canon, again);
});
