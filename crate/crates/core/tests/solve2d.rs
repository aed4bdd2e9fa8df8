mod common;

use minres::medium::{ComponentSpec, DensitySpec, KindSpec, RadialDensity, ViolationPolicy};
use minres::pressure::Curve;
use minres::solve2d::{minimize_side_2d, region_curves_2d, solve_2d, solve_2d_with};
use minres::{Error, FlowAnalysis, FlowContext, SolutionKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{certificate_violation, chord_multiplier, perturb, realized_slopes, slope_grid};

fn unit_flow() -> FlowAnalysis {
    FlowAnalysis::new(&FlowContext::gaussian(2, 1.0).unwrap()).unwrap()
}

#[test]
fn kinds_follow_the_thresholds() {
    let fa = unit_flow();
    let lm = fa.landmarks;
    let cases = [
        (0.7, SolutionKind::Trapezium),
        (0.5 * (lm.u_plus0 + lm.u_star), SolutionKind::IsoscelesTriangle),
        (3.0, SolutionKind::IsoscelesTriangle),
        (lm.u_star + 0.5 * lm.u_minus0, SolutionKind::TriangleTrapezium),
        (7.83, SolutionKind::TwoTriangles),
    ];
    for (h, kind) in cases {
        let (body, report) = solve_2d_with(&fa, h).unwrap();
        assert_eq!(report.kind, kind, "h = {h}");
        body.validate().unwrap();
        assert!((body.h_plus + body.h_minus - h).abs() < 1e-12);
    }
}

#[test]
fn trapezium_and_triangle_shapes() {
    let fa = unit_flow();
    let (b, _) = solve_2d_with(&fa, 0.7).unwrap();
    assert_eq!(b.h_minus, 0.0);
    // flat top of half-width t0 = (u0 - h)/u0, then slope u0
    let t0 = (fa.landmarks.u_plus0 - 0.7) / fa.landmarks.u_plus0;
    assert!((b.f_plus.points[1].t - t0).abs() < 1e-12);
    assert!((b.f_plus.slope_at(0.5 * (1.0 + t0)) - fa.landmarks.u_plus0).abs() < 1e-9);
    let (b, _) = solve_2d_with(&fa, 3.0).unwrap();
    assert_eq!(b.f_plus.points.len(), 2);
    assert!((b.f_plus.slope_at(0.5) - 3.0).abs() < 1e-12);
}

#[test]
fn resistance_matches_the_profile() {
    let fa = unit_flow();
    for h in [0.2, 0.7, 2.0, 3.0, 4.0, 5.0, 6.0, 7.83, 12.0] {
        let (body, report) = solve_2d_with(&fa, h).unwrap();
        let direct = body.resistance(fa.front_curve.as_ref(), fa.rear_curve.as_ref());
        assert!((direct - report.r).abs() < 1e-12, "h = {h}");
        assert!(report.diagnostics.value_residual < 1e-12);
        assert!((report.r_tilde - report.r).abs() < 1e-15, "V = 1");
    }
}

#[test]
fn split_is_optimal_against_brute_force() {
    let fa = unit_flow();
    for h in [0.7, 3.0, 5.0, 6.0, 7.83, 10.0] {
        let (_, report) = solve_2d_with(&fa, h).unwrap();
        let brute = (0..=4000)
            .map(|k| {
                let z = h * k as f64 / 4000.0;
                fa.front.pbar(z) + fa.rear.pbar(h - z)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(report.r <= brute + 1e-12, "h = {h}: {} vs {brute}", report.r);
        assert!(report.r >= brute - 1e-5, "grid should come close");
    }
}

#[test]
fn optimality_certificate() {
    // one multiplier for both sides: every realized slope minimizes
    // p_eps(w) - lambda w over w >= 0
    let fa = unit_flow();
    for h in [0.7, 3.0, 5.0, 7.83] {
        let (body, _) = solve_2d_with(&fa, h).unwrap();
        let front = fa.front_curve.as_ref() as &dyn Curve;
        let lambda = chord_multiplier(front, &realized_slopes(&body.f_plus));
        let grid = slope_grid(4.0 * (h + 2.0));
        for (side, curve) in [(&body.f_plus, front), (&body.f_minus, fa.rear_curve.as_ref() as &dyn Curve)] {
            let gap = certificate_violation(curve, lambda, &realized_slopes(side), &grid);
            assert!(gap < 1e-9, "h = {h}: {gap}");
        }
    }
}

#[test]
fn perturbations_never_help() {
    let fa = unit_flow();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for h in [0.7, 3.0, 5.0, 7.83] {
        let (body, report) = solve_2d_with(&fa, h).unwrap();
        for k in 0..50 {
            let eps = [1e-3, 1e-2, 0.1, 0.5][k % 4];
            let other = perturb(&mut rng, &body, eps);
            other.validate().unwrap();
            let r = other.resistance(fa.front_curve.as_ref(), fa.rear_curve.as_ref());
            assert!(r >= report.r - 1e-9, "h = {h}, eps = {eps}: {r} < {}", report.r);
        }
    }
}

#[test]
fn resistance_decreases_with_height() {
    let fa = unit_flow();
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let r = solve_2d_with(&fa, 0.2 * k as f64).unwrap().1.r;
        assert!(r <= prev + 1e-14);
        prev = r;
    }
}

#[test]
fn region_curves_are_ordered() {
    let ctx = FlowContext::gaussian(2, 1.0).unwrap();
    let grid: Vec<f64> = (0..12).map(|k| 0.05 * 1.6f64.powi(k)).collect();
    let rows = region_curves_2d(&ctx, &grid).unwrap();
    for r in &rows {
        assert!(r.u_plus0 < r.u_star && r.u_star < r.u_star_plus_u_minus0, "{r:?}");
    }
    // u_+^0 falls toward 1 as V grows
    assert!(rows.windows(2).all(|w| w[1].u_plus0 < w[0].u_plus0));
    assert!((rows.last().unwrap().u_plus0 - 1.0).abs() < 0.01);
}

#[test]
fn mixture_gives_two_triangles_and_trapezium() {
    let spec = DensitySpec {
        d: 2,
        kind: KindSpec::Mixture {
            components: vec![
                ComponentSpec { weight: 1.0, scale: 1.0, base: KindSpec::Gaussian },
                ComponentSpec { weight: 160_000.0, scale: 20.0, base: KindSpec::Gaussian },
            ],
        },
        on_violation: ViolationPolicy::Reject,
    };
    let fa = FlowAnalysis::new(&FlowContext::new(RadialDensity::from_spec(&spec).unwrap(), 1.0).unwrap()).unwrap();
    let second = fa.rear.components()[1];
    let (body, report) = solve_2d_with(&fa, 60.0).unwrap();
    assert_eq!(report.kind, SolutionKind::TwoTrianglesTrapezium);
    let hm = body.h_minus;
    assert!(second.lo < hm && hm < second.hi);
    // rear: slope lo on [0, t], slope hi on [t, 1], t = (hi - h_-)/(hi - lo)
    let t = (second.hi - hm) / (second.hi - second.lo);
    let pts = &body.f_minus.points;
    assert_eq!(pts.len(), 3);
    assert!((pts[1].t - t).abs() < 1e-12);
    assert!((body.f_minus.slope_at(0.5 * t) - second.lo).abs() < 1e-9);
    assert!((body.f_minus.slope_at(0.5 * (1.0 + t)) - second.hi).abs() < 1e-9);
    // the split equalizes the envelope slopes
    assert!((fa.front.pbar_slope(body.h_plus) - fa.rear.pbar_slope(hm)).abs() < 1e-10);
}

#[test]
fn side_minimizer_edge_cases() {
    let fa = unit_flow();
    let (flat, value) = minimize_side_2d(&fa.front, 0.0).unwrap();
    assert_eq!(flat.height(), 0.0);
    assert_eq!(value, fa.front_curve.value(0.0));
    assert!(matches!(minimize_side_2d(&fa.front, -1.0), Err(Error::Domain(_))));
}

#[test]
fn bad_arguments() {
    let ctx = FlowContext::gaussian(2, 1.0).unwrap();
    assert!(matches!(solve_2d(&ctx, 0.0), Err(Error::Domain(_))));
    assert!(matches!(solve_2d(&ctx, f64::NAN), Err(Error::Domain(_))));
    let ctx3 = FlowContext::gaussian(3, 1.0).unwrap();
    assert!(matches!(solve_2d(&ctx3, 1.0), Err(Error::Domain(_))));
    assert!(matches!(region_curves_2d(&ctx, &[]), Err(Error::Input(_))));
    assert!(matches!(region_curves_2d(&ctx, &[1.0, 0.5]), Err(Error::Input(_))));
}
