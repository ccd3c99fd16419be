#![no_main]

use std::sync::{Arc, OnceLock};

use libfuzzer_sys::fuzz_target;
use quotlab::parse::{parse_element, parse_ring};
use quotlab::{AlgebraBuilder, NormalFormAlgebra};

fn algebras() -> &'static [Arc<NormalFormAlgebra>] {
    static ALGS: OnceLock<Vec<Arc<NormalFormAlgebra>>> = OnceLock::new();
    ALGS.get_or_init(|| {
        ["F_5", "Z/9", "Q", "GF(4)"]
            .iter()
            .map(|r| {
                AlgebraBuilder::new(parse_ring(r).unwrap())
                    .var("x")
                    .var("y")
                    .relation(&[("x", 1), ("y", 1)])
                    .truncation(Some(6))
                    .copies(2)
                    .build()
                    .unwrap()
            })
            .collect()
    })
}

fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else { return };
    let Ok(src) = std::str::from_utf8(rest) else { return };
    if src.len() > 512 {
        return;
    }
    let algs = algebras();
    let alg = &algs[which as usize % algs.len()];
    if let Ok(e) = parse_element(alg, src) {
        let again = parse_element(alg, &e.to_string()).expect("display round trip");
        assert_eq!(again, e);
    }
});
