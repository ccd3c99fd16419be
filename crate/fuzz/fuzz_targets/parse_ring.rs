#![no_main]

use libfuzzer_sys::fuzz_target;
use quotlab::parse::parse_ring;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_ring(src) {
        // the canonical spec must parse back to the same ring
        let again = parse_ring(&r.spec()).expect("spec round trip");
        assert_eq!(again.spec(), r.spec());
    }
});
