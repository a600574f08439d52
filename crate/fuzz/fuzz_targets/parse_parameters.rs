#![no_main]

use libfuzzer_sys::fuzz_target;
use lll_core::params::{format_parameters, parse_parameters};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(values) = parse_parameters(text) {
        assert!(values.iter().all(|v| v.is_finite()));
        assert_eq!(parse_parameters(&format_parameters(&values)), Ok(values));
    }
});
