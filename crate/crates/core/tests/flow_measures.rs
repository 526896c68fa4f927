use modpress::interval::CertifiedInterval;
use modpress::flow::{flow_pressure, pressure_curve, FlowParams, FlowPotentialSpec, RootKind};
use modpress::measures::{derivative_check, integrate, lift, random_measure, rpf_measure};
use modpress::potential::{CylinderPotential, Term};
use modpress::shift::{truncate, TransitionRule};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quick(n: u64, k: usize) -> FlowParams {
    FlowParams { tol: 1e-5, ..FlowParams::new(n, k) }
}

#[test]
fn root_set_is_consistent() {
    let d = flow_pressure(&FlowPotentialSpec::zero(), quick(50, 1)).unwrap();
    assert_eq!(d.kind, RootKind::RootExists);
    assert!(d.root_set_consistent);
}

#[test]
fn refining_keeps_overlap() {
    let coarse = flow_pressure(&FlowPotentialSpec::zero(), quick(50, 1)).unwrap().p_phi;
    let fine = flow_pressure(&FlowPotentialSpec::zero(), quick(100, 2)).unwrap().p_phi;
    assert!(coarse.intersects(&fine), "{coarse} then {fine}");
    assert!(fine.width() <= coarse.width() + 1e-5);
}

#[test]
fn adding_tau_shifts_flow_pressure() {
    let params = quick(100, 2);
    let base = flow_pressure(&FlowPotentialSpec::zero(), params).unwrap().p_phi;
    for a in [0.3, 1.0] {
        let moved = flow_pressure(&FlowPotentialSpec::new(CylinderPotential::tau(a)), params).unwrap().p_phi;
        let shifted = CertifiedInterval::new(base.lower + a - 1e-12, base.upper + a + 1e-12);
        assert!(moved.intersects(&shifted), "a = {a}: {moved} vs {shifted}");
    }
}

#[test]
fn curve_is_interval_monotone() {
    let grid: Vec<f64> = (0..8).map(|i| 0.55 + 0.1 * i as f64).collect();
    let c = pressure_curve(&FlowPotentialSpec::zero(), &grid, quick(60, 2)).unwrap();
    assert!(c.monotone && c.convex);
    let (a, b) = c.sign_change.expect("the curve crosses zero");
    assert!(a < 0.79 && b > 0.78, "({a}, {b})");
}

#[test]
fn rpf_measures_are_stationary() {
    let s = truncate(&TransitionRule::positive_geodesic(), 20).unwrap();
    for pot in [CylinderPotential::zero(), CylinderPotential::tau(-0.8)] {
        for k in 1..=2 {
            let m = rpf_measure(&s, &pot, k).unwrap();
            assert!(m.stationarity_residual() <= 1e-10, "{}", m.stationarity_residual());
        }
    }
}

#[test]
fn lifted_roof_integrates_to_one() {
    let s = truncate(&TransitionRule::positive_geodesic(), 15).unwrap();
    let tau = CylinderPotential::tau(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let m = random_measure(&s, 2, &mut rng).unwrap();
        let stats = lift(&m, &tau, &tau).unwrap();
        assert!(stats.flow_integral.contains(1.0), "{}", stats.flow_integral);
        assert!(stats.flow_entropy.is_finite());
        let one = integrate(&m, &CylinderPotential::constant(1.0)).unwrap();
        assert_eq!((one.lower, one.upper), (1.0, 1.0));
    }
}

#[test]
fn slope_matches_roof_integral() {
    let s = truncate(&TransitionRule::positive_geodesic(), 15).unwrap();
    let base = CylinderPotential::from_terms(vec![Term::PowerLog { a: 0.0, b: 2.0 }]);
    for t in [0.6, 1.0] {
        let r = derivative_check(&s, &base, t, 1e-3, 2).unwrap();
        assert!(r.error <= 1e-4, "t = {t}: {r:?}");
    }
}
