#![no_main]

use libfuzzer_sys::fuzz_target;
use temporal_cert::sdpsolve::parse_tolerance;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_tolerance(s) {
        assert!(t.is_finite() && t > 0.0);
    }
});
