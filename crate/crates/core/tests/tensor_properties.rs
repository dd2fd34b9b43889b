use std::collections::BTreeMap;

use proptest::prelude::*;
use sigvol::tensor::{shuffle_words, weight_check, GradedTensor, Weight, Word};

fn word_strategy(d: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..=d as u8, 0..=max_len).prop_map(Word::new)
}

fn tensor_strategy(d: usize, trunc: usize) -> impl Strategy<Value = GradedTensor> {
    prop::collection::vec((word_strategy(d, trunc), -1.0f64..1.0), 0..8)
        .prop_map(move |terms| GradedTensor::from_terms(d, trunc, terms).unwrap())
}

fn dims() -> impl Strategy<Value = usize> {
    1usize..=3
}

/// Interlacings enumerated by choosing which positions of the output come from `u`.
fn shuffle_oracle(u: &[u8], v: &[u8]) -> BTreeMap<Vec<u8>, f64> {
    let n = u.len() + v.len();
    let mut out = BTreeMap::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != u.len() {
            continue;
        }
        let (mut a, mut b) = (0, 0);
        let mut w = Vec::with_capacity(n);
        for p in 0..n {
            if mask >> p & 1 == 1 {
                w.push(u[a]);
                a += 1;
            } else {
                w.push(v[b]);
                b += 1;
            }
        }
        *out.entry(w).or_insert(0.0) += 1.0;
    }
    out
}

fn tensor_shuffle_oracle(a: &GradedTensor, b: &GradedTensor, n: usize) -> BTreeMap<Vec<u8>, f64> {
    let mut out = BTreeMap::new();
    for (u, x) in a.iter() {
        for (v, y) in b.iter() {
            if u.len() + v.len() > n {
                continue;
            }
            for (w, m) in shuffle_oracle(u.letters(), v.letters()) {
                *out.entry(w).or_insert(0.0) += x * y * m;
            }
        }
    }
    out
}

fn close_maps(t: &GradedTensor, m: &BTreeMap<Vec<u8>, f64>, tol: f64) -> bool {
    let mut keys: Vec<Vec<u8>> = m.keys().cloned().collect();
    keys.extend(t.iter().map(|(w, _)| w.letters().to_vec()));
    keys.iter().all(|k| (t.coeff(&Word::new(k.clone())) - m.get(k).copied().unwrap_or(0.0)).abs() <= tol)
}

fn max_diff(a: &GradedTensor, b: &GradedTensor) -> f64 {
    a.sub(b).unwrap().iter().map(|(_, c)| c.abs()).fold(0.0, f64::max)
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn shuffle_matches_interlacing_enumeration(
        (d, a, b) in dims().prop_flat_map(|d| (Just(d), tensor_strategy(d, 3), tensor_strategy(d, 3)))
    ) {
        let s = a.shuffle(&b, 5).unwrap();
        prop_assert!(close_maps(&s, &tensor_shuffle_oracle(&a, &b, 5), 1e-12), "d = {}", d);
    }

    #[test]
    fn shuffle_commutative_and_associative(
        (a, b, c) in dims().prop_flat_map(|d| (tensor_strategy(d, 2), tensor_strategy(d, 2), tensor_strategy(d, 2)))
    ) {
        let n = 6;
        prop_assert!(max_diff(&a.shuffle(&b, n).unwrap(), &b.shuffle(&a, n).unwrap()) <= 1e-12);
        let left = a.shuffle(&b, n).unwrap().shuffle(&c, n).unwrap();
        let right = a.shuffle(&b.shuffle(&c, n).unwrap(), n).unwrap();
        prop_assert!(max_diff(&left, &right) <= 1e-12);
    }

    #[test]
    fn shuffle_unit(a in dims().prop_flat_map(|d| tensor_strategy(d, 4))) {
        let one = GradedTensor::unit(a.dim(), 4);
        prop_assert_eq!(one.shuffle(&a, 4).unwrap(), a.clone());
    }

    #[test]
    fn shuffle_term_count_is_binomial(u in word_strategy(3, 4), v in word_strategy(3, 4)) {
        let total: u64 = shuffle_words(u.letters(), v.letters()).iter().map(|(_, m)| m).sum();
        prop_assert_eq!(total, binomial(u.len() + v.len(), u.len()));
    }

    #[test]
    fn concat_associative_with_unit(
        (a, b, c) in dims().prop_flat_map(|d| (tensor_strategy(d, 3), tensor_strategy(d, 3), tensor_strategy(d, 3)))
    ) {
        let n = 5;
        let left = a.concat(&b, n).unwrap().concat(&c, n).unwrap();
        let right = a.concat(&b.concat(&c, n).unwrap(), n).unwrap();
        prop_assert!(max_diff(&left, &right) <= 1e-12);
        let one = GradedTensor::unit(a.dim(), n);
        prop_assert_eq!(one.concat(&a, n).unwrap(), a.with_trunc(n).unwrap());
        prop_assert_eq!(a.concat(&one, n).unwrap(), a.with_trunc(n).unwrap());
    }

    #[test]
    fn concat_matches_word_juxtaposition(
        (a, b) in dims().prop_flat_map(|d| (tensor_strategy(d, 3), tensor_strategy(d, 3)))
    ) {
        let mut oracle: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (u, x) in a.iter() {
            for (v, y) in b.iter() {
                if u.len() + v.len() <= 4 {
                    let mut w = u.letters().to_vec();
                    w.extend_from_slice(v.letters());
                    *oracle.entry(w).or_insert(0.0) += x * y;
                }
            }
        }
        prop_assert!(close_maps(&a.concat(&b, 4).unwrap(), &oracle, 1e-14));
    }

    #[test]
    fn antipode_involution_and_anti_homomorphism(
        (a, b) in dims().prop_flat_map(|d| (tensor_strategy(d, 3), tensor_strategy(d, 3)))
    ) {
        prop_assert_eq!(a.antipode().antipode(), a.clone());
        let n = 6;
        let lhs = a.concat(&b, n).unwrap().antipode();
        let rhs = b.antipode().concat(&a.antipode(), n).unwrap();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-14);
    }

    #[test]
    fn banach_algebra_bound(
        (a, b) in dims().prop_flat_map(|d| (tensor_strategy(d, 3), tensor_strategy(d, 3))),
        r in 1.0f64..4.0,
    ) {
        let w = Weight::geometric(r);
        let cw = w.c_w().unwrap();
        let prod = a.concat(&b, 6).unwrap().norms(&w).norm_w;
        let bound = cw * a.norms(&w).norm_w * b.norms(&w).norm_w;
        prop_assert!(prod <= bound * (1.0 + 1e-12) + 1e-15, "{} > {}", prod, bound);
    }

    #[test]
    fn banach_bound_polynomial_weight(
        (a, b) in dims().prop_flat_map(|d| (tensor_strategy(d, 3), tensor_strategy(d, 3))),
    ) {
        let w = Weight::polynomial(1.0);
        let cw = w.c_w().unwrap();
        let prod = a.concat(&b, 6).unwrap().norms(&w).norm_w;
        prop_assert!(prod <= cw * a.norms(&w).norm_w * b.norms(&w).norm_w * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn pairing_cauchy_schwarz_and_dense_oracle(
        (ell, a) in dims().prop_flat_map(|d| (tensor_strategy(d, 4), tensor_strategy(d, 4))),
        r in 1.0f64..3.0,
    ) {
        let w = Weight::geometric(r);
        let p = ell.pair(&a).unwrap();
        let bound = ell.norms(&w).norm_2w * a.norms(&w).norm_2winv;
        prop_assert!(p.abs() <= bound * (1.0 + 1e-12) + 1e-15);
        // dense evaluation over every word of length <= 4
        let dense: f64 = Word::all_up_to(a.dim(), 4).iter().map(|wd| ell.coeff(wd) * a.coeff(wd)).sum();
        prop_assert!((p - dense).abs() <= 1e-13);
    }

    #[test]
    fn projection_laws(a in dims().prop_flat_map(|d| tensor_strategy(d, 4)), n in 0usize..5, m in 0usize..5) {
        let pn = a.project(n);
        prop_assert_eq!(pn.project(n), pn.clone());
        prop_assert_eq!(a.project(m).project(n), a.project(n.min(m)));
        prop_assert!(pn.iter().all(|(w, _)| w.len() <= n));
    }

    #[test]
    fn projection_tail_decreasing(a in dims().prop_flat_map(|d| tensor_strategy(d, 4))) {
        let w = Weight::geometric(2.0);
        let tails: Vec<f64> = (0..=4).map(|n| a.sub(&a.project(n)).unwrap().norms(&w).norm_w).collect();
        prop_assert!(tails.windows(2).all(|t| t[1] <= t[0]));
        prop_assert_eq!(tails[4], 0.0);
    }

    #[test]
    fn text_roundtrip(a in dims().prop_flat_map(|d| tensor_strategy(d, 4))) {
        let back = GradedTensor::from_text(a.dim(), a.trunc(), &a.to_text()).unwrap();
        prop_assert_eq!(back, a);
    }
}

#[test]
fn normalisation_examples() {
    let e = |w: &[u8]| GradedTensor::basis(2, 4, Word::new(w.to_vec())).unwrap();
    assert_eq!(e(&[1]).shuffle(&e(&[1]), 4).unwrap(), e(&[1, 1]).scale(2.0));
    assert_eq!(e(&[1]).shuffle(&e(&[2]), 4).unwrap(), e(&[1, 2]).add(&e(&[2, 1])).unwrap());
    let lhs = e(&[1]).add(&e(&[2])).unwrap().concat(&e(&[1]), 4).unwrap();
    assert_eq!(lhs, e(&[1, 1]).add(&e(&[2, 1])).unwrap());
    assert_eq!(e(&[1, 2]).antipode(), e(&[2, 1]));
    assert_eq!(e(&[1]).antipode(), e(&[1]).scale(-1.0));
}

#[test]
fn weight_reports() {
    let g = weight_check(&Weight::geometric(2.0), 10);
    assert!(g.monotone && g.w0_is_one);
    assert!((g.c_w_estimate - 1.0).abs() < 1e-12);
    let p = weight_check(&Weight::polynomial(1.0), 10);
    assert!(p.monotone && p.c_w_estimate <= 1.0);
    let c = weight_check(&Weight::constant(), 10);
    assert!(c.monotone && c.c_w_estimate == 1.0);
}
