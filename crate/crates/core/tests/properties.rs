use modpress::coding::{
    cyclic_equal, endpoints_from_periodic_code, geometric_code, is_positive, window_matches_block,
    Endpoint, GeodesicEndpoints,
};
use modpress::minus_cf::{eval_minus_cf, expand_minus_cf, height_constant, tau, TailModel};
use modpress::potential::{CylinderPotential, Term};
use modpress::pressure::{
    pressure, pressure_periodic_oracle, pressure_truncated, PressureParams, DEFAULT_ORACLE_CAP,
};
use modpress::quadratic::Quadratic;
use modpress::shift::{is_allowed, periodic_words_capped, truncate, Symbol, TransitionRule};
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::strategy::ValueTree;

fn rule_a() -> TransitionRule {
    TransitionRule::positive_geodesic()
}

/// Admissible periodic blocks of the positive-geodesic shift.
fn positive_block(max_len: usize, max_digit: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(3..=max_digit, 1..=max_len).prop_filter("admissible", |b| is_positive(b, true))
}

fn to_symbols(b: &[i64]) -> Vec<Symbol> {
    b.iter().map(|&d| d as Symbol).collect()
}

#[test]
fn truncations_are_irreducible_and_aperiodic() {
    for n in 6..50 {
        let s = truncate(&rule_a(), n).unwrap();
        assert!(s.irreducible, "N = {n}");
        assert!(s.is_aperiodic(), "N = {n}");
    }
}

fn trace_of_power(adj: &[Vec<bool>], n: usize) -> u128 {
    let k = adj.len();
    let mut m: Vec<Vec<u128>> = (0..k).map(|i| (0..k).map(|j| u128::from(i == j)).collect()).collect();
    for _ in 0..n {
        m = (0..k)
            .map(|i| (0..k).map(|j| (0..k).filter(|&l| adj[l][j]).map(|l| m[i][l]).sum()).collect())
            .collect();
    }
    (0..k).map(|i| m[i][i]).sum()
}

#[test]
fn periodic_word_count_is_trace() {
    for (top, max_n) in [(6, 10), (8, 7)] {
        let s = truncate(&rule_a(), top).unwrap();
        for n in 1..=max_n {
            let words = periodic_words_capped(&s, n, 1e9).unwrap();
            assert_eq!(words.len() as u128, trace_of_power(&s.adjacency, n), "N = {top}, n = {n}");
        }
    }
}

#[test]
fn allowed_transitions() {
    let a = rule_a();
    assert!(is_allowed(&a, 3, 6).unwrap());
    assert!(is_allowed(&a, 6, 3).unwrap());
    assert!(!is_allowed(&a, 3, 5).unwrap());
    assert!(is_allowed(&a, 5, 4).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn minus_cf_round_trip(b in positive_block(8, 15)) {
        let v = eval_minus_cf(&to_symbols(&b), TailModel::PeriodicExtension).unwrap();
        let w = v.exact.expect("periodic value is exact");
        let e = expand_minus_cf(&w, b.len()).unwrap();
        let digits: Vec<i64> = e.digits.iter().map(|&d| d as i64).collect();
        prop_assert!(cyclic_equal(&digits, &b), "{:?} -> {:?}", b, digits);
    }

    #[test]
    fn deeper_prefix_never_widens(word in prop::collection::vec(3u64..40, 2..10)) {
        for k in 1..word.len() {
            let a = eval_minus_cf(&word[..k], TailModel::WorstCase).unwrap().value;
            let b = eval_minus_cf(&word[..k + 1], TailModel::WorstCase).unwrap().value;
            prop_assert!(b.width() <= a.width(), "k = {}: {} then {}", k, a, b);
        }
    }

    #[test]
    fn roof_bounds(word in prop::collection::vec(3u64..1_000_000, 1..8)) {
        let t = tau(&word, TailModel::WorstCase).unwrap();
        let n1 = word[0] as f64;
        let slack = 1e-12 * n1.ln().max(1.0);
        prop_assert!(t.lower >= 2.0 * (height_constant() * n1).ln() - slack);
        prop_assert!(t.upper <= 2.0 * n1.ln() + slack);
    }

    #[test]
    fn field_closure(b in positive_block(5, 12), p in -5i64..5, q in 1i64..5, r in 1i64..5, s in 0i64..5) {
        let w = endpoints_from_periodic_code(&b).unwrap();
        let Endpoint::Exact(w) = w.w else { panic!("exact endpoint") };
        let d = w.d.clone();
        let same = |x: &Quadratic| x.is_rational() || x.d == d;
        prop_assert!(same(&w.recip().unwrap()));
        prop_assert!(same(&w.mul(&w).unwrap()));
        if let Ok(m) = w.mobius(p, q, r, s) {
            prop_assert!(same(&m));
        }
        prop_assert_eq!(w.cmp_exact(&w.conj()).unwrap(), std::cmp::Ordering::Greater);
    }

    #[test]
    fn codes_coincide(b in positive_block(6, 12)) {
        let g = endpoints_from_periodic_code(&b).unwrap();
        prop_assert!(g.is_reduced().unwrap());
        let c = geometric_code(&g, b.len()).unwrap();
        prop_assert!(cyclic_equal(&c.code, &b), "{:?} -> {:?}", b, c.code);
    }

    #[test]
    fn reduced_endpoints(b in prop::collection::vec(2i64..30, 1..7)) {
        prop_assume!(b.iter().any(|&d| d > 2));
        let g = endpoints_from_periodic_code(&b).unwrap();
        prop_assert!(g.is_reduced().unwrap());
    }
}

#[test]
fn parabolic_block_is_rejected() {
    assert!(endpoints_from_periodic_code(&[2, 2]).is_err());
}

#[test]
fn translation_keeps_grouped_code() {
    let mut n = 0;
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = positive_block(5, 12);
    while n < 20 {
        let b = strategy.new_tree(&mut runner).unwrap().current();
        let g = endpoints_from_periodic_code(&b).unwrap();
        let (Endpoint::Exact(u), Endpoint::Exact(w)) = (&g.u, &g.w) else { unreachable!() };
        let moved = GeodesicEndpoints::exact(u.add_int(1), w.add_int(1));
        let code = geometric_code(&moved, 4 * b.len()).unwrap().code;
        // The first group may be cut short by the starting point; the rest repeats b.
        assert!(window_matches_block(&code[1..], &b), "{b:?} -> {code:?}");
        n += 1;
    }
}

fn locally_constant(a: f64, c: f64) -> CylinderPotential {
    CylinderPotential::from_terms(vec![Term::PowerLog { a, b: 0.0 }, Term::Constant { value: c }])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_agrees_on_small_truncations(top in 5u64..=7, a in 0.0f64..2.0, c in -1.0f64..1.0) {
        let s = truncate(&rule_a(), top).unwrap();
        let pot = locally_constant(a, c);
        let enc = pressure_truncated(&s, &pot, PressureParams::default()).unwrap().enclosure;
        let v = pressure_periodic_oracle(&s, &pot, 12, DEFAULT_ORACLE_CAP).unwrap();
        prop_assert!((v - enc.midpoint()).abs() <= 1e-3, "{} vs {}", v, enc);
    }

    #[test]
    fn constant_shift_covariance(a in -3.0f64..3.0, coef in -1.5f64..-0.6) {
        let s = truncate(&rule_a(), 12).unwrap();
        let pot = CylinderPotential::tau(coef);
        let p = PressureParams::with_depth(2);
        let base = pressure_truncated(&s, &pot, p).unwrap().enclosure;
        let moved = pressure_truncated(&s, &pot.plus_constant(a), p).unwrap().enclosure;
        // Two relative matrix-product slops on the root, plus the rounding of `+ a`.
        let slop = 2e-12 + 4.0 * f64::EPSILON * (base.upper.abs() + a.abs());
        prop_assert!((moved.lower - (base.lower + a)).abs() <= slop, "{} vs {} + {}", moved, base, a);
        prop_assert!((moved.upper - (base.upper + a)).abs() <= slop, "{} vs {} + {}", moved, base, a);
    }
}

#[test]
fn lower_bound_grows_with_truncation() {
    for coef in [-0.8, -0.6] {
        let pot = CylinderPotential::tau(coef);
        let lows: Vec<f64> = [10, 20, 50, 100]
            .iter()
            .map(|&n| pressure(&rule_a(), &pot, n, PressureParams::with_depth(2)).unwrap().value.lower())
            .collect();
        assert!(lows.windows(2).all(|w| w[1] >= w[0]), "{coef}: {lows:?}");
    }
}

#[test]
fn depth_refines_tau_enclosures() {
    let s = truncate(&rule_a(), 20).unwrap();
    for coef in [-0.8, -1.2] {
        let pot = CylinderPotential::tau(coef);
        let widths: Vec<f64> = (1..=3)
            .map(|k| pressure_truncated(&s, &pot, PressureParams::with_depth(k)).unwrap().enclosure.width())
            .collect();
        assert!(widths.windows(2).all(|w| w[1] <= w[0]), "{coef}: {widths:?}");
    }
}

#[test]
fn series_pressure_is_translation_invariant_in_the_alphabet() {
    // The same weights indexed from 0 and from 1 give the same series.
    let l2 = 2f64.ln();
    let from0 = CylinderPotential::from_terms(vec![Term::Geometric { intercept: -l2, slope: -l2 }]);
    let from1 = CylinderPotential::from_terms(vec![Term::Geometric { intercept: 0.0, slope: -l2 }]);
    let a = modpress::pressure::full_shift_series_pressure(&from0, 0, 100).unwrap().value.finite().unwrap();
    let b = modpress::pressure::full_shift_series_pressure(&from1, 1, 100).unwrap().value.finite().unwrap();
    assert!(a.intersects(&b) && a.contains(0.0), "{a} {b}");
}

#[test]
fn big_radicands_stay_exact() {
    let q = Quadratic::new(
        num_rational::BigRational::from_integer(BigInt::from(1)),
        num_rational::BigRational::from_integer(BigInt::from(1)),
        BigInt::from(1_000_003u64) * BigInt::from(1_000_033u64),
    )
    .unwrap();
    assert_eq!(q.mul(&q.conj()).unwrap().as_integer(), Some(BigInt::from(1) - BigInt::from(1_000_003u64) * BigInt::from(1_000_033u64)));
}
