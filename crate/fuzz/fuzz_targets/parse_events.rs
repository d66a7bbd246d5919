#![no_main]

use libfuzzer_sys::fuzz_target;
use temporal_cert::qsim::{pdm_general, EventScenario};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(scenario) = EventScenario::from_json_str(s) {
        let r = pdm_general(&scenario).expect("validated scenario builds a PDM");
        assert!((r.matrix().trace() - 1.0).abs() < 1e-6);
    }
});
