#![no_main]

use libfuzzer_sys::fuzz_target;
use temporal_cert::certify::GridSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = s.parse::<GridSpec>() {
        assert_eq!(format!("{}x{}", g.u, g.v).parse::<GridSpec>().ok(), Some(g));
        assert!(g.du() > 0.0 && g.dv() > 0.0);
    }
});
