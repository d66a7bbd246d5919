#![no_main]

use libfuzzer_sys::fuzz_target;
use temporal_cert::sdpsolve::SdpProblem;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = SdpProblem::from_json_str(s) {
        // Accepted problems survive a round trip unchanged.
        let back = SdpProblem::from_json_str(&p.to_json_string()).expect("round trip parses");
        assert_eq!(back, p);
    }
});
