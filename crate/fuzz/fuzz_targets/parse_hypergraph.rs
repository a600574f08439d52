#![no_main]

use libfuzzer_sys::fuzz_target;
use lll_core::encodings::{hypergraph_to_instance, parse_hypergraph};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(h) = parse_hypergraph(text) {
        assert_eq!(parse_hypergraph(&h.to_text()).as_ref(), Ok(&h));
        if h.num_vertices() <= 10_000 {
            let _ = hypergraph_to_instance(&h, 2);
        }
    }
});
