//! Randomized invariants for the core machinery.

use proptest::prelude::*;

use mqrac::classical::{evaluate_strategy, zigzag_formula, ClassicalStrategy};
use mqrac::quantum::{
    basis_along, bloch_to_state, measure, rotate_bloch, state_to_bloch, Axis, Basis1Q, BlochVector,
};
use mqrac::qrac::RemapTable;
use mqrac::task::{BitString, RacTask, Rational};
use mqrac::{earac, TOL_EXACT};

fn arb_unit_bloch() -> impl Strategy<Value = BlochVector> {
    (
        -1.0f64..1.0,
        -1.0f64..1.0,
        -1.0f64..1.0,
    )
        .prop_filter_map("nonzero", |(x, y, z)| {
            BlochVector([x, y, z]).normalized()
        })
}

proptest! {
    #[test]
    fn bitstring_display_parse_roundtrip(len in 1u8..=16, raw in 0u32..u32::MAX) {
        let value = raw % (1u32 << len);
        let s = BitString::new(len, value).unwrap();
        prop_assert_eq!(BitString::parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn concat_success_forms_agree(eps in 0.0f64..=1.0, l in 1u32..=10) {
        let a = earac::concat_success(eps, l);
        let b = earac::concat_success_binomial(eps, l);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.5..=1.0).contains(&a));
        // one more channel never helps
        prop_assert!(earac::concat_success(eps, l + 1) <= a + 1e-12);
    }

    #[test]
    fn bloch_state_roundtrip(v in arb_unit_bloch()) {
        let back = state_to_bloch(&bloch_to_state(&v)).unwrap();
        prop_assert!(back.distance(&v) < 1e-9);
    }

    #[test]
    fn rotations_preserve_angles(u in arb_unit_bloch(), v in arb_unit_bloch(),
                                 angle in -10.0f64..10.0, axis in 0usize..3) {
        let axis = [Axis::X, Axis::Y, Axis::Z][axis];
        let ru = rotate_bloch(&u, axis, angle);
        let rv = rotate_bloch(&v, axis, angle);
        prop_assert!((ru.dot(&rv) - u.dot(&v)).abs() < 1e-9);
        prop_assert!((ru.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_qubit_measurement_follows_overlap(v in arb_unit_bloch(), d in arb_unit_bloch()) {
        let state = bloch_to_state(&v);
        let branches = measure(&state, 0, &basis_along(&d)).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < TOL_EXACT);
        let expect = (1.0 + d.dot(&v)) / 2.0;
        prop_assert!((branches[0].probability - expect).abs() < 1e-9);
    }

    #[test]
    fn random_basis_branches_sum_to_one(theta in 0.0f64..std::f64::consts::PI,
                                        phi in 0.0f64..std::f64::consts::TAU,
                                        qubit in 0usize..3) {
        let state = mqrac::quantum::make_ghz();
        let branches = measure(&state, qubit, &Basis1Q::from_angles(theta, phi)).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        prop_assert!((total - 1.0).abs() < TOL_EXACT);
    }

    #[test]
    fn strategy_scores_stay_in_range(n in 2u8..=5, first in 0u8..16, relay_seed in 0u64..,
                                     decoder_seed in 0u64..) {
        let task = RacTask::standard(n, 2).unwrap();
        let strategy = ClassicalStrategy {
            first_party: (0..4).map(|i| (first >> i) & 1).collect(),
            relays: (0..n - 2)
                .map(|i| {
                    let t = (relay_seed >> (4 * i)) & 0xf;
                    [(t >> 3) as u8 & 1, (t >> 2) as u8 & 1, (t >> 1) as u8 & 1, t as u8 & 1]
                })
                .collect(),
            decoder: (0..2 * n).map(|i| ((decoder_seed >> i) & 1) as u8).collect(),
        };
        let score = evaluate_strategy(&strategy, &task).unwrap();
        let v = score.to_f64();
        prop_assert!((0.0..=1.0).contains(&v));
        // flipping every guess complements the score
        let mut flipped = strategy.clone();
        for b in &mut flipped.decoder {
            *b ^= 1;
        }
        let fscore = evaluate_strategy(&flipped, &task).unwrap();
        prop_assert_eq!(score + fscore, Rational::new(1, 1));
    }

    #[test]
    fn remap_tasks_are_relabelings(perm_seed in 0u64..) {
        // build a permutation of 3-bit strings from the seed
        let mut items: Vec<u32> = (0..8).collect();
        let mut s = perm_seed;
        for i in (1..items.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            items.swap(i, (s >> 33) as usize % (i + 1));
        }
        let remap = RemapTable::new(3, items).unwrap();
        let fwd = remap.forward_task(2).unwrap();
        let rel = remap.relabelled_task(2).unwrap();
        for x in 0..8u32 {
            for y in 0..3u8 {
                // the relabelled task asks for x's bits given remap(x)
                prop_assert_eq!(rel.value(remap.apply(x), y),
                                BitString::new(3, x).unwrap().get(y));
                prop_assert_eq!(fwd.value(x, y),
                                BitString::new(3, remap.apply(x)).unwrap().get(y));
            }
        }
        prop_assert_eq!(remap.inverse().inverse().apply(5), remap.apply(5));
    }
}

#[test]
fn zigzag_formula_decreases_toward_half() {
    let mut prev = Rational::new(1, 1);
    for n in 2..=12u8 {
        let v = zigzag_formula(n);
        assert!(v.to_f64() > 0.5, "n = {n}");
        assert!(v < prev, "n = {n} should decrease");
        prev = v;
    }
}
