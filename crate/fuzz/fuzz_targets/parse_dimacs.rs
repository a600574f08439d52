#![no_main]

use libfuzzer_sys::fuzz_target;
use lll_core::encodings::{cnf_to_instance, parse_dimacs};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = parse_dimacs(text) {
        assert_eq!(parse_dimacs(&f.to_dimacs()).as_ref(), Ok(&f));
        if f.num_vars() <= 10_000 {
            let _ = cnf_to_instance(&f);
        }
    }
});
