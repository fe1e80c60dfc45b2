//! Randomized invariants of the ring, group, and matrix layers.

use proptest::prelude::*;

use bott_core::cohomology::coboundary_witness;
use bott_core::group::{
    evaluate, word_inverse, word_multiply, word_of_motion, CocycleTable, GroupWord,
};
use bott_core::ring::{Ring, RingElement};
use bott_core::{enumerate_all, BottMatrix};

fn arb_matrix(max_n: usize) -> impl Strategy<Value = BottMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        let bits = n * (n - 1) / 2;
        (Just(n), 0..1u64 << bits)
            .prop_map(|(n, key)| BottMatrix::from_key(n, key).expect("key in range"))
    })
}

/// A random sum of square-free monomials in `n` generators, one mask per
/// monomial (the mask may repeat; repeats cancel, which is fine).
fn element_from_masks(n: usize, masks: &[u8]) -> RingElement {
    let mut acc = RingElement::zero(n);
    for &mask in masks {
        let indices: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let mono = RingElement::monomial(n, &indices).expect("indices below n");
        acc = acc.add(&mono).expect("same dimension");
    }
    acc
}

fn arb_matrix_and_elements(count: usize) -> impl Strategy<Value = (BottMatrix, Vec<RingElement>)> {
    arb_matrix(4).prop_flat_map(move |m| {
        let n = m.n();
        let mask_range = 0u8..1 << n;
        (
            Just(m),
            proptest::collection::vec(proptest::collection::vec(mask_range, 0..6), count),
        )
            .prop_map(move |(m, mask_lists)| {
                let elems = mask_lists
                    .iter()
                    .map(|masks| element_from_masks(n, masks))
                    .collect();
                (m, elems)
            })
    })
}

fn arb_matrix_and_words(count: usize) -> impl Strategy<Value = (BottMatrix, Vec<GroupWord>)> {
    arb_matrix(4).prop_flat_map(move |m| {
        let n = m.n();
        (
            Just(m),
            proptest::collection::vec(proptest::collection::vec(-5i64..=5, n), count),
        )
            .prop_map(|(m, exp_lists)| {
                let words = exp_lists.iter().map(|e| GroupWord::new(e)).collect();
                (m, words)
            })
    })
}

proptest! {
    #[test]
    fn ring_product_commutes((m, elems) in arb_matrix_and_elements(2)) {
        let ring = Ring::new(&m);
        let uv = ring.mul(&elems[0], &elems[1]).unwrap();
        let vu = ring.mul(&elems[1], &elems[0]).unwrap();
        prop_assert_eq!(uv, vu);
    }

    #[test]
    fn ring_product_associates((m, elems) in arb_matrix_and_elements(3)) {
        let ring = Ring::new(&m);
        let left = ring
            .mul(&ring.mul(&elems[0], &elems[1]).unwrap(), &elems[2])
            .unwrap();
        let right = ring
            .mul(&elems[0], &ring.mul(&elems[1], &elems[2]).unwrap())
            .unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn ring_unit_is_neutral((m, elems) in arb_matrix_and_elements(1)) {
        let ring = Ring::new(&m);
        let one = RingElement::one(m.n());
        prop_assert_eq!(ring.mul(&one, &elems[0]).unwrap(), elems[0]);
    }

    #[test]
    fn squaring_is_additive((m, elems) in arb_matrix_and_elements(2)) {
        let ring = Ring::new(&m);
        let sum = elems[0].add(&elems[1]).unwrap();
        let sq_sum = ring.mul(&sum, &sum).unwrap();
        let sq_parts = ring
            .mul(&elems[0], &elems[0])
            .unwrap()
            .add(&ring.mul(&elems[1], &elems[1]).unwrap())
            .unwrap();
        prop_assert_eq!(sq_sum, sq_parts);
    }

    #[test]
    fn word_product_matches_motion_composition((m, words) in arb_matrix_and_words(2)) {
        let prod = word_multiply(&m, &words[0], &words[1]).unwrap();
        let lhs = evaluate(&m, &prod).unwrap();
        let rhs = evaluate(&m, &words[0])
            .unwrap()
            .compose(&evaluate(&m, &words[1]).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn word_inverse_cancels((m, words) in arb_matrix_and_words(1)) {
        let inv = word_inverse(&m, &words[0]).unwrap();
        prop_assert!(word_multiply(&m, &words[0], &inv).unwrap().is_zero());
        prop_assert!(word_multiply(&m, &inv, &words[0]).unwrap().is_zero());
    }

    #[test]
    fn word_of_motion_round_trips((m, words) in arb_matrix_and_words(1)) {
        let motion = evaluate(&m, &words[0]).unwrap();
        let back = word_of_motion(&m, &motion).unwrap();
        prop_assert_eq!(back.as_ref(), Some(&words[0]));
    }

    #[test]
    fn conjugates_share_invariants(m in arb_matrix(5)) {
        let ty = m.type_signature();
        let orientable = m.is_orientable();
        for c in m.permutation_orbit() {
            prop_assert_eq!(c.type_signature(), ty.clone());
            prop_assert_eq!(c.is_orientable(), orientable);
        }
    }

    #[test]
    fn key_round_trips(m in arb_matrix(5)) {
        prop_assert_eq!(BottMatrix::from_key(m.n(), m.key()).unwrap(), m);
    }

    #[test]
    fn normal_form_is_idempotent(m in arb_matrix(5)) {
        let (nf, _) = m.normal_form();
        prop_assert!(nf.is_normal_form());
        prop_assert_eq!(nf.normal_form().0, nf);
        prop_assert!(m.permutation_orbit().contains(&nf));
    }
}

#[test]
fn doubled_cocycle_columns_are_coboundaries() {
    for n in 1..=3 {
        for a in enumerate_all(n).unwrap() {
            let table = CocycleTable::build(&a).unwrap();
            for k in 0..n {
                let mut col_mask = 0u8;
                for i in 0..k {
                    if a.entry(i, k) {
                        col_mask |= 1 << i;
                    }
                }
                let doubled: Vec<i64> = table.coordinate_column(k).iter().map(|v| 2 * v).collect();
                let witness = coboundary_witness(n, col_mask, &doubled).unwrap();
                assert!(
                    witness.is_some(),
                    "doubled coordinate {k} of {a:?} is not a coboundary"
                );
            }
        }
    }
}
