mod common;

use minres::pressure::{pressure_tail, Curve, PressureModel};
use minres::solve2d::solve_2d_with;
use minres::{BodyProfile, FlowAnalysis, FlowContext, Side};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn pressure_shape(d in 2usize..4, v in 0.05f64..8.0, u in 0.0f64..40.0) {
        let ctx = FlowContext::gaussian(d, v).unwrap();
        let m = PressureModel::new(&ctx).unwrap();
        let (pp, dp) = m.eval(Side::Front, u);
        let (pm, dm) = m.eval(Side::Rear, u);
        let tol = 1e-9 * pp.abs();
        prop_assert!(dp <= tol);
        prop_assert!(dp <= dm + tol);
        prop_assert!(pm >= pressure_tail(&ctx, Side::Rear).unwrap() - tol);
        prop_assert!(pp >= pm);
    }

    #[test]
    fn tails_cancel(d in 2usize..4, v in 0.05f64..8.0) {
        let ctx = FlowContext::gaussian(d, v).unwrap();
        let sum = pressure_tail(&ctx, Side::Front).unwrap() + pressure_tail(&ctx, Side::Rear).unwrap();
        prop_assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn envelope_supports_the_curve(v in 0.05f64..8.0, u in 0.0f64..30.0) {
        let fa = FlowAnalysis::new(&FlowContext::gaussian(2, v).unwrap()).unwrap();
        for (env, curve) in [(&fa.front, fa.front_curve.as_ref() as &dyn Curve), (&fa.rear, fa.rear_curve.as_ref() as &dyn Curve)] {
            let p = curve.value(u);
            prop_assert!(env.pbar(u) <= p + 1e-12 * (1.0 + p.abs()));
            // chord above the envelope: convexity
            let (a, b) = (0.5 * u, 1.5 * u + 0.1);
            let mid = 0.5 * (env.pbar(a) + env.pbar(b));
            prop_assert!(env.pbar(0.5 * (a + b)) <= mid + 1e-12);
        }
        let lm = fa.landmarks;
        prop_assert!(lm.u_plus0 < lm.u_star && lm.u_star < lm.u_star + lm.u_minus0);
    }

    #[test]
    fn planar_solution_is_consistent(v in 0.1f64..5.0, h in 0.05f64..12.0, dh in 0.0f64..2.0) {
        let fa = FlowAnalysis::new(&FlowContext::gaussian(2, v).unwrap()).unwrap();
        let (body, report) = solve_2d_with(&fa, h).unwrap();
        body.validate().unwrap();
        prop_assert!((body.h_plus + body.h_minus - h).abs() < 1e-12);
        let direct = body.resistance(fa.front_curve.as_ref(), fa.rear_curve.as_ref());
        prop_assert!((direct - report.r).abs() < 1e-12 * (1.0 + direct.abs()));
        // a taller allowance never costs more
        let (_, taller) = solve_2d_with(&fa, h + dh).unwrap();
        prop_assert!(taller.r <= report.r + 1e-12);
    }

    #[test]
    fn random_bodies_round_trip(seed in 0u64..1000, h in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hp = 0.6 * h;
        let body = BodyProfile {
            d: 3,
            h,
            h_plus: hp,
            h_minus: h - hp,
            kind: minres::SolutionKind::Second,
            f_plus: common::random_side(&mut rng, hp),
            f_minus: common::random_side(&mut rng, h - hp),
        };
        body.validate().unwrap();
        let back = BodyProfile::from_json(&body.to_json()).unwrap();
        prop_assert_eq!(back, body);
    }
}
