mod common;

use common::{
    binomial_upper_quantile, bs_mgf, generator_regression, sidak_z, transform_mc, two_sided_tail, Agreement,
    GeneratorRegression,
};
use proptest::prelude::*;
use sigvol::models::preset;
use sigvol::riccati::{
    build_generator, integrate_flow, integrate_ode, projection_compatibility, riccati_rhs, scalar_explosion_bound,
    transform_value, Coord, Extension, FlowConfig, FlowOutcome, GeneratorTable, RiccatiError,
};
use sigvol::tensor::{GradedTensor, Word};

fn sig(w: &Word) -> Coord {
    Coord::Sig(w.clone())
}

fn agreement(reg: &GeneratorRegression, table: &GeneratorTable) -> (Agreement, Agreement) {
    let drift = Agreement::of(&reg.drift, |r| table.b(&sig(&r.on), &sig(&r.of[0])));
    let gamma = Agreement::of(&reg.gamma, |r| table.gamma(&sig(&r.on), &sig(&r.of[0]), &sig(&r.of[1])));
    (drift, gamma)
}

#[test]
fn reference_quantiles() {
    assert!((two_sided_tail(1.96) - 0.05).abs() < 1e-4);
    assert!((two_sided_tail(3.0) - 0.0026998).abs() < 1e-6);
    assert_eq!(binomial_upper_quantile(10, 0.5, 0.5), 5);
    let z = sidak_z(1000, two_sided_tail(3.0));
    assert!(z > 4.5 && z < 4.8, "{z}");
}

#[test]
fn drift_regression_matches_table_to_level_three() {
    let table = build_generator(3, 2, None).unwrap();
    let (drift, _) = agreement(&generator_regression(2, 3, 32, 20_000, 101, false), &table);
    println!("drift |I| <= 3: {drift:?}, expected beyond 3 SE {:.2}", drift.expected_beyond());
    assert!(drift.calibrated(), "{drift:?}");
}

#[test]
fn covariation_regression_matches_table_to_level_two() {
    let table = build_generator(2, 2, None).unwrap();
    let (drift, gamma) = agreement(&generator_regression(2, 2, 32, 30_000, 102, true), &table);
    println!("drift: {drift:?}\ngamma: {gamma:?}");
    assert!(drift.calibrated(), "{drift:?}");
    assert!(gamma.calibrated(), "{gamma:?}");
}

#[test]
fn generator_invariants() {
    let ell = GradedTensor::from_terms(2, 1, [(Word::empty(), 0.2), (Word::letter(2), 0.1)]).unwrap();
    let plain = build_generator(4, 2, None).unwrap();
    let ext = build_generator(4, 2, Some(Extension { ell, eta: vec![1.0, 0.0] })).unwrap();
    let words = plain.words().to_vec();
    for (i, j, b) in plain.drift_entries() {
        assert!(b != 0.0 && words[i].len() < words[j].len());
    }
    for (i, j, k, g) in plain.gamma_entries() {
        assert!(g != 0.0 && j <= k);
        let (cj, ck) = (plain.coord(j), plain.coord(k));
        assert_eq!(plain.gamma(&plain.coord(i), &cj, &ck), plain.gamma(&plain.coord(i), &ck, &cj));
    }
    // the signature block of the extended table is the plain table
    for i in 0..words.len() {
        for j in 0..words.len() {
            let (a, b) = (sig(&words[i]), sig(&words[j]));
            assert_eq!(plain.b(&a, &b), ext.b(&a, &b));
        }
    }
    for (i, j, k, g) in plain.gamma_entries() {
        assert_eq!(ext.gamma(&plain.coord(i), &plain.coord(j), &plain.coord(k)), g);
    }
}

#[test]
fn gamma_quadratic_part_on_level_one() {
    // u = a e_1 + c e_2: R_∅ = ½(a² + c²), nothing else.
    let t = build_generator(2, 2, None).unwrap();
    let u = GradedTensor::from_terms(2, 1, [(Word::letter(1), 0.3), (Word::letter(2), -0.7)]).unwrap();
    let r = riccati_rhs(&t.state(&u, 0.0).unwrap(), &t).unwrap();
    assert!((r[0] - 0.5 * (0.09 + 0.49)).abs() < 1e-15);
    assert!(r[1..].iter().all(|x| *x == 0.0));
}

#[test]
fn extended_bs_rhs() {
    let sigma = 0.2;
    let ell = GradedTensor::from_terms(1, 0, [(Word::empty(), sigma)]).unwrap();
    let t = build_generator(0, 1, Some(Extension { ell, eta: vec![1.0] })).unwrap();
    for ux in [-1.0, 0.5, 2.0, 3.0] {
        let r = riccati_rhs(&t.state(&GradedTensor::zero(1, 0), ux).unwrap(), &t).unwrap();
        assert!((r[0] - 0.5 * sigma * sigma * (ux * ux - ux)).abs() < 1e-15);
        assert_eq!(r[1], 0.0);
    }
}

#[test]
fn bs_flow_matches_closed_form() {
    let sigma = 0.2;
    let ell = GradedTensor::from_terms(1, 0, [(Word::empty(), sigma)]).unwrap();
    let t = build_generator(0, 1, Some(Extension { ell, eta: vec![1.0] })).unwrap();
    let cfg = FlowConfig { record: true, ..Default::default() };
    for ux in [0.5, 2.0, -1.5] {
        let out = integrate_flow(&t.state(&GradedTensor::zero(1, 0), ux).unwrap(), 1.0, &t, &cfg).unwrap();
        for (tau, u) in out.trajectory() {
            assert!((u[0] - 0.5 * sigma * sigma * (ux * ux - ux) * tau).abs() < 1e-8);
        }
        for x0 in [0.0, 0.3] {
            let v = transform_value(&t.state(&GradedTensor::zero(1, 0), ux).unwrap(), 1.0, &t, x0, &cfg).unwrap();
            let want = bs_mgf(ux, sigma, 1.0, x0);
            assert!(((v - want) / want).abs() < 1e-6);
        }
    }
}

#[test]
fn linear_table_matches_matrix_exponential() {
    // Γ vanishes on time-ending words, so u = c·e_{00} flows linearly: ψ_0' = ψ_00, ψ_∅' = ψ_0.
    let t = build_generator(4, 1, None).unwrap();
    let u = GradedTensor::from_terms(1, 2, [(Word::new(vec![0, 0]), 0.8)]).unwrap();
    let s = t.state(&u, 0.0).unwrap();
    let out = integrate_flow(&s, 1.5, &t, &FlowConfig::default()).unwrap();
    let FlowOutcome::Solved { u, .. } = out else { panic!("{out:?}") };
    let at = |w: &[u8]| u[t.coord_index(&Coord::Sig(Word::new(w.to_vec()))).unwrap()];
    // nilpotent: exp(τB) u = (0.8, 0.8τ, 0.4τ²) on (00, 0, ∅)
    assert!((at(&[0, 0]) - 0.8).abs() < 1e-12);
    assert!((at(&[0]) - 1.2).abs() < 1e-10);
    assert!((at(&[]) - 0.9).abs() < 1e-10);
}

#[test]
fn pure_signature_transform_closed_forms() {
    let t = build_generator(4, 2, None).unwrap();
    let cfg = FlowConfig::default();
    // E exp(c W²/2) = (1 − cT)^{-1/2}
    let c = 0.4;
    let u = GradedTensor::from_terms(2, 2, [(Word::new(vec![2, 2]), c)]).unwrap();
    let v = transform_value(&t.state(&u, 0.0).unwrap(), 1.2, &t, 0.0, &cfg).unwrap();
    assert!((v - (1.0 - c * 1.2f64).powf(-0.5)).abs() < 1e-9);
    // E exp(a W¹) = exp(a²T/2)
    let u = GradedTensor::from_terms(2, 1, [(Word::letter(1), 0.7)]).unwrap();
    let v = transform_value(&t.state(&u, 0.0).unwrap(), 2.0, &t, 0.0, &cfg).unwrap();
    assert!((v - (0.49f64).exp()).abs() < 1e-9);
    // ⟨e_0, Ŵ_T⟩ = T
    let u = GradedTensor::from_terms(2, 1, [(Word::letter(0), -0.3)]).unwrap();
    let v = transform_value(&t.state(&u, 0.0).unwrap(), 2.0, &t, 0.0, &cfg).unwrap();
    assert!((v - (-0.6f64).exp()).abs() < 1e-12);
    // c ≥ 1/T explodes
    let u = GradedTensor::from_terms(2, 2, [(Word::new(vec![2, 2]), 1.0)]).unwrap();
    assert!(matches!(
        transform_value(&t.state(&u, 0.0).unwrap(), 2.0, &t, 0.0, &cfg),
        Err(RiccatiError::Exploded { .. })
    ));
}

#[test]
fn window_is_enforced() {
    let t = build_generator(3, 2, None).unwrap();
    let u = GradedTensor::from_terms(2, 2, [(Word::new(vec![1, 2]), 0.1)]).unwrap();
    let s = t.state(&u, 0.0).unwrap();
    assert!(matches!(transform_value(&s, 1.0, &t, 0.0, &FlowConfig::default()), Err(RiccatiError::Window { need: 4, have: 3 })));
    let ell = GradedTensor::from_terms(2, 2, [(Word::new(vec![2, 2]), 0.1)]).unwrap();
    assert!(matches!(
        build_generator(3, 2, Some(Extension { ell, eta: vec![1.0, 0.0] })),
        Err(RiccatiError::Window { need: 4, have: 3 })
    ));
}

#[test]
fn scalar_explosion_before_deadline() {
    let mut rng = 0x2545F4914F6CDD1Du64;
    let mut next = || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..10 {
        let a = 0.2 + 4.8 * next();
        let y0 = 0.2 + 4.8 * next();
        let exact = 1.0 / (a * y0);
        let deadline = scalar_explosion_bound(a, y0);
        let out = integrate_ode(&[y0], deadline, |y, o| o[0] = a * y[0] * y[0], |y| y[0].abs(), &FlowConfig::default())
            .unwrap();
        let FlowOutcome::Exploded { t_star, .. } = out else { panic!("a = {a}, y0 = {y0}: {out:?}") };
        assert!(t_star < deadline);
        assert!(((t_star - exact) / exact).abs() < 0.02, "{t_star} vs {exact}");
    }
    assert!(scalar_explosion_bound(1.0, 10.0) > scalar_explosion_bound(1.0, 100.0));
}

fn random_direction(d: usize, deg: usize, coeffs: &[f64]) -> GradedTensor {
    let words = Word::all_up_to(d, deg);
    GradedTensor::from_terms(d, deg, words.into_iter().zip(coeffs.iter().copied())).unwrap()
}

fn tables(d: usize, m: usize, n: usize, ext: Option<Extension>) -> (GeneratorTable, GeneratorTable) {
    (build_generator(n, d, ext.clone()).unwrap(), build_generator(m, d, ext).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn projection_compatibility_random(
        d in 1usize..=2,
        coeffs in prop::collection::vec(-1.0f64..1.0, 7),
        ux in -2.0f64..2.0,
        extended in any::<bool>(),
    ) {
        let u = random_direction(d, 1, &coeffs);
        let ext = extended.then(|| {
            let mut ell_terms = vec![(Word::empty(), 0.2)];
            ell_terms.push((Word::letter(d as u8), 0.1));
            let mut eta = vec![0.0; d];
            eta[0] = 1.0;
            Extension { ell: GradedTensor::from_terms(d, 1, ell_terms).unwrap(), eta }
        });
        let ux = if extended { ux } else { 0.0 };
        let (tn, tm) = tables(d, 3, 5, ext);
        prop_assert!(projection_compatibility(&u, ux, &tn, &tm).unwrap());
    }
}

#[test]
fn projection_compatibility_window_violation() {
    let (tn, tm) = tables(2, 3, 5, None);
    let u = random_direction(2, 2, &[0.1; 13]);
    assert!(matches!(projection_compatibility(&u, 0.0, &tn, &tm), Err(RiccatiError::Window { .. })));
    let zero = GradedTensor::zero(2, 0);
    assert!(projection_compatibility(&zero, 0.0, &tn, &tm).unwrap());
}

fn check_against_mc(name: &str, trunc: usize, dirs: &[(GradedTensor, f64)], n_paths: usize) -> Vec<(f64, f64, f64)> {
    let p = preset(name).unwrap();
    let params = p.params(1.0, 1.0, 100).unwrap();
    let ell = p.ell.clone().unwrap();
    let table = build_generator(trunc, p.d(), Some(Extension { ell, eta: p.eta.clone() })).unwrap();
    dirs.iter()
        .enumerate()
        .map(|(k, (u, ux))| {
            let r = transform_value(&table.state(u, *ux).unwrap(), 1.0, &table, 0.0, &FlowConfig::default()).unwrap();
            let (m, se) = transform_mc(&params, u, *ux, n_paths, 900 + k as u64);
            (r, m, se)
        })
        .collect()
}

#[test]
fn transform_matches_mc_black_scholes() {
    let e = |w: &[u8], c: f64| GradedTensor::from_terms(1, w.len(), [(Word::new(w.to_vec()), c)]).unwrap();
    let zero = GradedTensor::zero(1, 0);
    let dirs = [(zero.clone(), 0.5), (zero.clone(), 2.0), (e(&[1], 0.3), 0.0), (e(&[0], 0.4), 1.0), (e(&[1, 1], 0.2), 0.0)];
    for (r, m, se) in check_against_mc("black_scholes", 4, &dirs, 40_000) {
        assert!((r - m).abs() <= 3.0 * se + 1e-12, "riccati {r} mc {m} se {se}");
    }
}

#[test]
fn transform_matches_mc_first_order() {
    let e = |w: &[u8], c: f64| GradedTensor::from_terms(2, w.len(), [(Word::new(w.to_vec()), c)]).unwrap();
    let zero = GradedTensor::zero(2, 0);
    let dirs = [
        (zero.clone(), 0.5),
        (zero.clone(), 2.0),
        (e(&[2], 0.3), 0.0),
        (e(&[1], 0.2), 0.5),
        (e(&[2, 2], 0.1), 0.0),
    ];
    for (r, m, se) in check_against_mc("first_order", 5, &dirs, 40_000) {
        assert!((r - m).abs() <= 3.0 * se, "riccati {r} mc {m} se {se}");
    }
}
