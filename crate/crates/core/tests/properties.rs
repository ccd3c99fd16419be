use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quotlab::action::{Action, AlgebraAutomorphism, ConstantAction};
use quotlab::group::ConstantGroup;
use quotlab::linalg;
use quotlab::parse::{parse_element, parse_ring};
use quotlab::{AlgebraBuilder, Element, NormalFormAlgebra};

fn algebra(ring: &str, vars: &[&str], n: u32, copies: usize) -> Arc<NormalFormAlgebra> {
    let mut b = AlgebraBuilder::new(parse_ring(ring).unwrap());
    for v in vars {
        b = b.var(v);
    }
    b.truncation(Some(n)).copies(copies).build().unwrap()
}

fn z4_on_f5() -> Action {
    let a = algebra("F_5", &["t"], 8, 1);
    let phi = AlgebraAutomorphism::new(&a, vec![parse_element(&a, "2*t").unwrap()]).unwrap();
    Action::constant(ConstantAction::new(&a, ConstantGroup::cyclic(4).unwrap(), &[1], vec![phi]).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn display_parse_round_trip(seed in any::<u64>(), ring in prop::sample::select(vec!["F_7", "Z/9", "Q", "GF(4)", "F_3[eps]/(eps^2)"])) {
        let a = algebra(ring, &["x", "y"], 5, 2);
        let e = Element::random(&a, &mut ChaCha8Rng::seed_from_u64(seed));
        let back = parse_element(&a, &e.to_string()).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn norm_is_multiplicative(s1 in any::<u64>(), s2 in any::<u64>()) {
        let act = z4_on_f5();
        let a = Element::random(act.algebra(), &mut ChaCha8Rng::seed_from_u64(s1));
        let b = Element::random(act.algebra(), &mut ChaCha8Rng::seed_from_u64(s2));
        prop_assert_eq!(act.norm(&(&a * &b)), &act.norm(&a) * &act.norm(&b));
    }

    #[test]
    fn sigmas_are_invariant(seed in any::<u64>()) {
        let act = z4_on_f5();
        let a = Element::random(act.algebra(), &mut ChaCha8Rng::seed_from_u64(seed));
        for s in act.sigma(&a) {
            prop_assert!(act.is_invariant(&s), "{}", s);
        }
    }

    #[test]
    fn kernel_vectors_are_annihilated(vals in prop::collection::vec(0i64..9, 12)) {
        let ring = parse_ring("Z/9").unwrap();
        let m: Vec<Vec<_>> = vals.chunks(4).map(|r| r.iter().map(|&v| ring.from_i64(v)).collect()).collect();
        for k in linalg::kernel(&ring, &m, 4).unwrap() {
            for row in &m {
                let dot = row.iter().zip(&k).fold(ring.zero(), |acc, (a, b)| ring.add(&acc, &ring.mul(a, b)));
                prop_assert!(ring.is_zero(&dot));
            }
        }
    }
}
