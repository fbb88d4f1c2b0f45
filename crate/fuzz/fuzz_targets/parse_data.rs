#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(v) = tailtilt::io::parse_data(data, false) {
        assert!(!v.is_empty() && v.iter().all(|x| x.is_finite()));
        let neg = tailtilt::io::parse_data(data, true).expect("negation cannot fail");
        assert!(v.iter().zip(&neg).all(|(a, b)| *a == -*b));
    }
});
