use finsler_ab::sampling::Sampler;
use finsler_ab::metric::{eval_phi_jet, PhiFunction, PhiSpec};
use finsler_ab::ode::{
    back_substitution_residual, residual_ode, solve_phi_ivp, IvpOptions, OdeConstants, OdeKind, OdeSpec, PhiSolution,
};

const B: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn nodes_within(sol: &PhiSolution, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    sol.s.iter().zip(&sol.phi).filter(|(s, _)| **s >= lo && **s <= hi).map(|(s, p)| (*s, *p)).collect()
}

#[test]
fn sphere_equation_with_unit_slope_recovers_randers() {
    let sol = solve_phi_ivp(OdeSpec::sphere(1, B).unwrap(), 1.0, 1.0, IvpOptions::default()).unwrap();
    assert!(sol.spans_full_interval());
    for (s, p) in nodes_within(&sol, -B, B) {
        assert!((p - (1.0 + s)).abs() < 1e-9, "phi({s}) = {p}");
    }
    let [p, dp, _] = sol.interpolate(0.3).unwrap();
    assert!((p - 1.3).abs() < 1e-9 && (dp - 1.0).abs() < 1e-8);
}

#[test]
fn kropina_constants_track_reciprocal_away_from_pole() {
    let spec = OdeSpec {
        kind: OdeKind::General,
        constants: OdeConstants::kropina(B, 0.0, 3),
    };
    let opts = IvpOptions { s0: 0.5, ..IvpOptions::default() };
    let sol = solve_phi_ivp(spec, 2.0, -4.0, opts).unwrap();
    let pts = nodes_within(&sol, 0.05, B);
    assert!(pts.len() > 10);
    for (s, p) in pts {
        assert!((p * s - 1.0).abs() < 1e-7, "phi({s}) s = {}", p * s);
    }
}

#[test]
fn solutions_satisfy_their_equation_off_grid() {
    for k in [1, 0, -1] {
        let sol = solve_phi_ivp(OdeSpec::sphere(k, B).unwrap(), 1.0, 0.3, IvpOptions::default()).unwrap();
        let (lo, hi) = sol.domain();
        let mut rng = Sampler::new((k + 5) as u64);
        let pts: Vec<f64> = (0..100).map(|_| rng.uniform(lo, hi)).filter(|s| !sol.s.contains(s)).collect();
        let r = back_substitution_residual(&sol, &pts).unwrap();
        assert!(r < 1e-7, "k = {k}: {r} on {:?}", sol.domain());
    }
}

#[test]
fn numeric_profile_jets_satisfy_general_form() {
    let c = OdeConstants::sphere_case(-1, B, 0.0).unwrap();
    let spec = OdeSpec {
        kind: OdeKind::General,
        constants: c,
    };
    let sol = solve_phi_ivp(spec, 1.0, 0.2, IvpOptions::default()).unwrap();
    let phi = PhiSpec::Numeric(std::sync::Arc::new(sol));
    for s in [-0.5, -0.1, 0.0, 0.25, 0.6] {
        let pj = eval_phi_jet(&phi, s, B * B).unwrap();
        let r = residual_ode(&pj, &c);
        assert!(r.abs() < 1e-7, "s = {s}: residual {r}");
    }
}

#[test]
fn truncation_is_reported_when_regularity_fails() {
    let sol = solve_phi_ivp(OdeSpec::sphere(1, B).unwrap(), 1.0, 0.3, IvpOptions::default()).unwrap();
    assert!(!sol.spans_full_interval());
    assert!(sol.meta.truncated_low.is_some() || sol.meta.truncated_high.is_some());
    let (lo, hi) = sol.domain();
    assert!(lo > -B && hi < B);
}

#[test]
fn solution_json_round_trips_exactly() {
    let sol = solve_phi_ivp(OdeSpec::sphere(0, B).unwrap(), 1.0, 0.3, IvpOptions::default()).unwrap();
    let text = serde_json::to_string(&sol).unwrap();
    let back: PhiSolution = serde_json::from_str(&text).unwrap();
    assert_eq!(back, sol);
    let spec = PhiSpec::Numeric(std::sync::Arc::new(back));
    let text = serde_json::to_string(&spec).unwrap();
    let again: PhiSpec = serde_json::from_str(&text).unwrap();
    assert_eq!(again.phi(&0.2).unwrap(), spec.phi(&0.2).unwrap());
}

#[test]
fn rejects_bad_initial_data() {
    let spec = OdeSpec::sphere(0, B).unwrap();
    assert!(solve_phi_ivp(spec, -1.0, 0.0, IvpOptions::default()).is_err());
    assert!(solve_phi_ivp(spec, 1.0, 0.0, IvpOptions { s0: 0.9, ..IvpOptions::default() }).is_err());
}
