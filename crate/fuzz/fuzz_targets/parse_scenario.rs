#![no_main]

use libfuzzer_sys::fuzz_target;
use quotlab::scenario::Scenario;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if src.len() > 4096 {
        return;
    }
    if let Ok(sc) = Scenario::parse(src, "fuzz") {
        // small truncation keeps whatever algebra it describes cheap to build
        let _ = sc.build(Some(4));
    }
});
