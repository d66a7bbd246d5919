#![no_main]

use libfuzzer_sys::fuzz_target;
use temporal_cert::qsim::{causality_monotone, Pdm};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Pdm::from_json_str(s) {
        let _ = r.eigenvalues();
        let _ = causality_monotone(&r);
    }
});
