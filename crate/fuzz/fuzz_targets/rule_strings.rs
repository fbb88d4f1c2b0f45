#![no_main]

use libfuzzer_sys::fuzz_target;
use tailtilt::evt::{KappaRule, ThresholdRule};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = s.parse::<ThresholdRule>() {
        assert_eq!(r.to_string().parse::<ThresholdRule>().unwrap(), r);
    }
    if let Ok(k) = s.parse::<KappaRule>() {
        assert_eq!(k.to_string().parse::<KappaRule>().unwrap(), k);
    }
});
