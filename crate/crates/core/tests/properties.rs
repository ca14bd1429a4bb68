use proptest::prelude::*;

use dss_bva::bva::{find_boundary, Axis, AxisBounds, ScenarioPoint};
use dss_bva::kinematics::{
    dss_absolute, dss_relative, to_absolute, to_relative, EnvConstants, RelativeScenario,
};
use dss_bva::reaction::ShiftedGamma;
use dss_bva::relevance::{coverage_report, DEFAULT_ZERO_TOL};
use dss_bva::sim::maneuver_states;

fn scenario() -> impl Strategy<Value = RelativeScenario> {
    (0.0..150.0f64, 0.0..40.0f64, 0.0..15.0f64, 0.0..3.0f64).prop_map(|(d_v, v_l, closing, t)| {
        RelativeScenario {
            effective_distance: d_v,
            speed_difference: -closing,
            reaction_time: t,
            leader_speed: v_l,
        }
    })
}

fn env() -> impl Strategy<Value = EnvConstants> {
    (9.0..10.0f64, 0.1..1.2f64, 2.0..12.0f64)
        .prop_map(|(g, mu, l)| EnvConstants::new(g, mu, l).unwrap())
}

proptest! {
    #[test]
    fn forms_agree(s in scenario(), env in env(), anchor in -500.0..500.0f64) {
        let abs = to_absolute(&s, &env, anchor).unwrap();
        let a = dss_absolute(&abs, &env).unwrap().dss;
        let r = dss_relative(&s, &env).unwrap().dss;
        prop_assert!((a - r).abs() <= 1e-9 * a.abs().max(1.0));
        let back = to_relative(&abs, &env);
        prop_assert!((back.effective_distance - s.effective_distance).abs() <= 1e-9);
    }

    #[test]
    fn dss_is_monotone(s in scenario(), step in 0.01..5.0f64) {
        let env = EnvConstants::default();
        let base = dss_relative(&s, &env).unwrap().dss;
        let farther = RelativeScenario { effective_distance: s.effective_distance + step, ..s };
        prop_assert!(dss_relative(&farther, &env).unwrap().dss > base);
        let slower = RelativeScenario { reaction_time: s.reaction_time + step, ..s };
        prop_assert!(dss_relative(&slower, &env).unwrap().dss <= base);
        // a faster follower (more negative delta_v) never helps
        let faster = RelativeScenario { speed_difference: s.speed_difference - step, ..s };
        prop_assert!(dss_relative(&faster, &env).unwrap().dss < base);
    }

    #[test]
    fn slopes_match_finite_differences(s in scenario(), env in env()) {
        prop_assume!(s.follower_speed() > 0.01);
        let h = 1e-4;
        let points = [ScenarioPoint::Relative(s), ScenarioPoint::Absolute(to_absolute(&s, &env, 0.0).unwrap())];
        for p in points {
            for &axis in p.form().axes() {
                let x = p.get(axis).unwrap();
                // speeds and reaction time cannot go negative
                let lo = match axis {
                    Axis::ReactionTime | Axis::LeaderSpeed | Axis::FollowerSpeed => (x - h).max(0.0),
                    _ => x - h,
                };
                let fd = (p.with(axis, x + h).unwrap().dss(&env).unwrap().dss
                    - p.with(axis, lo).unwrap().dss(&env).unwrap().dss) / (x + h - lo);
                let slope = p.slope(axis, &env).unwrap();
                prop_assert!((fd - slope).abs() <= 1e-4 * slope.abs().max(1.0), "{axis}: {fd} vs {slope}");
            }
        }
    }

    #[test]
    fn boundary_is_a_root(s in scenario()) {
        prop_assume!(s.follower_speed() > 0.5);
        let env = EnvConstants::default();
        let p = ScenarioPoint::Relative(s);
        let axis = AxisBounds::default().axis(Axis::EffectiveDistance).unwrap();
        if let Ok(root) = find_boundary(&axis, &p, &env, 1e-10, 0.0) {
            let dss = p.with(Axis::EffectiveDistance, root).unwrap().dss(&env).unwrap().dss;
            prop_assert!(dss.abs() < 1e-8);
        }
    }

    #[test]
    fn coverage_grows_with_samples(a in scenario(), b in scenario()) {
        let env = EnvConstants::default();
        let sa = maneuver_states(&to_absolute(&a, &env, 0.0).unwrap(), &env).unwrap();
        let mut both = sa.clone();
        both.extend(maneuver_states(&to_absolute(&b, &env, 0.0).unwrap(), &env).unwrap());
        let one = coverage_report(&sa, DEFAULT_ZERO_TOL);
        let two = coverage_report(&both, DEFAULT_ZERO_TOL);
        prop_assert!(two.covered >= one.covered);
        prop_assert!(two.covered <= 4);
    }

    #[test]
    fn quantile_inverts_cdf(p in 0.001..0.999f64, k in 0.5..6.0f64, theta in 0.05..0.5f64, t0 in 0.0..1.0f64) {
        let g = ShiftedGamma::new(t0, k, theta).unwrap();
        let q = g.quantile(p).unwrap();
        prop_assert!(q >= t0);
        prop_assert!((g.cdf(q) - p).abs() < 1e-9);
    }
}
