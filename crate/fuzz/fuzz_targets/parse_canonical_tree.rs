#![no_main]

use libfuzzer_sys::fuzz_target;
use lll_core::WitnessTree;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(tree) = WitnessTree::from_canonical(text) {
        let encoding = tree.canonical_encoding();
        let again = WitnessTree::from_canonical(&encoding).expect("canonical encodings parse");
        assert_eq!(again.canonical_encoding(), encoding);
    }
});
