#![no_main]

use libfuzzer_sys::fuzz_target;
use temporal_cert::qsim::{DensityMatrix, KrausChannel};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(ch) = KrausChannel::from_json_str(s) {
        let out = ch.apply(DensityMatrix::maximally_mixed().matrix());
        assert!((out.trace().re - 1.0).abs() < 1e-6);
        let _ = ch.kraus_rank(1e-9);
    }
});
