mod common;

use std::sync::Arc;

use minres::asymptotics::{golden_a, NewtonCurve, SlowCurve};
use minres::envelope::build_envelope;
use minres::solve_nd::{h_star_curve, solve_nd, NdAnalysis, QTransform};
use minres::{Error, FlowAnalysis, FlowContext, SolutionKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{nd_certificate, perturb, slope_grid};

fn slow_oracle(u: f64) -> (f64, f64) {
    let a = golden_a();
    let big_f = |s: f64| s.powi(3) / 3.0 + s + 0.5 * ((s - 1.0) / (s + 1.0)).ln();
    let s = |x: f64| (1.0 + x * x).sqrt();
    if u <= a {
        (a.powi(5), a.powi(5) * u)
    } else {
        (s(u).powi(3) / u, a.powi(6) + big_f(s(u)) - big_f(s(a)))
    }
}

fn newton_oracle(u: f64) -> (f64, f64) {
    if u <= 1.0 {
        (2.0, 2.0 * u)
    } else {
        let q = (1.0 + u * u).powi(2) / (2.0 * u);
        (q, 2.0 + 0.5 * (u.ln() + u * u + u.powi(4) / 4.0 - 1.25))
    }
}

#[test]
fn slow_curve_q_and_cumulative_q() {
    let qt = QTransform::new(build_envelope(Arc::new(SlowCurve)).unwrap(), 3).unwrap();
    for u in [0.0, 0.5, golden_a(), 1.5, 2.0, 3.7, 10.0, 55.0] {
        let (q, cq) = slow_oracle(u);
        assert!((qt.q(u) - q).abs() < 1e-9 * q, "q({u}) = {} vs {q}", qt.q(u));
        assert!((qt.cum_q(u) - cq).abs() < 1e-9 * cq.max(1.0), "Q({u}) = {} vs {cq}", qt.cum_q(u));
    }
}

#[test]
fn newton_curve_q_and_cumulative_q() {
    let qt = QTransform::new(build_envelope(Arc::new(NewtonCurve)).unwrap(), 3).unwrap();
    for u in [0.3, 1.0, 1.2, 2.5, 7.0, 30.0] {
        let (q, cq) = newton_oracle(u);
        assert!((qt.q(u) - q).abs() < 1e-9 * q, "q({u})");
        assert!((qt.cum_q(u) - cq).abs() < 1e-9 * cq, "Q({u}) = {} vs {cq}", qt.cum_q(u));
        // h(u) = u - Q/q and the side value pbar + Q/q^2
        assert!((qt.h_map(u) - (u - cq / q)).abs() < 1e-9 * (1.0 + u));
        let pbar = if u <= 1.0 { 1.0 - 0.5 * u } else { 1.0 / (1.0 + u * u) };
        assert!((qt.r_map(u) - (pbar + cq / (q * q))).abs() < 1e-9);
    }
}

#[test]
fn classical_newton_value_is_checked_two_ways() {
    let qt = QTransform::new(build_envelope(Arc::new(NewtonCurve)).unwrap(), 3).unwrap();
    for h in [0.5, 1.0, 2.0, 4.0] {
        let u = qt.solve_u(h).unwrap();
        assert!((qt.h_map(u) - h).abs() < 1e-12 * (1.0 + h));
        let direct = qt.side_value_direct(u, 1e-12).unwrap();
        assert!((direct - qt.side_value(u)).abs() < 1e-9, "h = {h}");
    }
    // tall bodies approach the cone value 1/(1 + h^2) from below
    let u = qt.solve_u(20.0).unwrap();
    assert!(qt.side_value(u) < 1.0 / 401.0);
}

#[test]
fn height_map_is_monotone_and_flat_on_the_first_component() {
    let fa = FlowAnalysis::new(&FlowContext::gaussian(3, 1.0).unwrap()).unwrap();
    let qt = QTransform::new(fa.front.clone(), 3).unwrap();
    let u0 = fa.landmarks.u_plus0;
    assert!(qt.h_map(0.5 * u0).abs() < 1e-12);
    let mut prev = 0.0;
    for k in 0..400 {
        let u = 0.05 * k as f64;
        let h = qt.h_map(u);
        assert!(h >= prev - 1e-12, "u = {u}");
        prev = h;
    }
    // canonical U at h = 0 is the right end of the flat stretch
    assert!((qt.solve_u(0.0).unwrap() - u0).abs() < 1e-9);
}

#[test]
fn h_star_bracket_and_trend() {
    let ctx = FlowContext::gaussian(3, 1.0).unwrap();
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let hs: Vec<f64> = h_star_curve(&ctx, &grid).unwrap().into_iter().map(|r| r.unwrap()).collect();
    assert!(1.97 < hs[2] && hs[2] < 3.11, "h*(1) = {}", hs[2]);
    assert!(hs.windows(2).all(|w| w[1] > w[0]), "{hs:?}");
    assert!(matches!(h_star_curve(&FlowContext::gaussian(2, 1.0).unwrap(), &grid), Err(Error::Domain(_))));
}

fn unit_analysis() -> NdAnalysis {
    NdAnalysis::new(FlowAnalysis::new(&FlowContext::gaussian(3, 1.0).unwrap()).unwrap()).unwrap()
}

#[test]
fn first_and_second_kind() {
    let nd = unit_analysis();
    let (body, r) = nd.solve(1.97).unwrap();
    assert_eq!(r.kind, SolutionKind::First);
    assert_eq!(body.h_minus, 0.0);
    body.validate().unwrap();
    let (body, r) = nd.solve(3.11).unwrap();
    assert_eq!(r.kind, SolutionKind::Second);
    assert!(body.h_plus > body.h_minus && body.h_minus > 0.0);
    body.validate().unwrap();
    assert_eq!(r.h_star, Some(nd.h_star));
}

#[test]
fn split_first_order_condition() {
    let nd = unit_analysis();
    for h in [2.5, 3.11, 5.0] {
        let (hp, _, _, diag) = nd.split(h).unwrap();
        let g = nd.front.slope_at_height(hp).unwrap() - nd.rear.slope_at_height(h - hp).unwrap();
        assert!(g.abs() < 1e-10, "h = {h}: {g}");
        assert!(diag.root_residual < 1e-10);
    }
}

#[test]
fn value_agrees_with_the_definition() {
    let nd = unit_analysis();
    for h in [0.5, 1.97, 2.5, 3.11, 6.0] {
        let (_, r) = nd.solve(h).unwrap();
        assert!(r.diagnostics.value_residual < 1e-7, "h = {h}: {}", r.diagnostics.value_residual);
    }
}

#[test]
fn profiles_are_strictly_convex_on_the_arc() {
    let nd = unit_analysis();
    let (body, _) = nd.solve_with_nodes(3.11, 2048).unwrap();
    for side in [&body.f_plus, &body.f_minus] {
        // nodes are spread over [0, U]; only those past the flat stretch survive
        let arc: Vec<f64> = side.points.iter().filter(|p| p.parametric).filter_map(|p| p.u).collect();
        assert!(arc.len() > 50, "{}", arc.len());
        assert!(arc.windows(2).all(|w| w[1] > w[0]));
        let chords: Vec<f64> = side.segments().map(|s| s.2).collect();
        assert!(chords.windows(2).all(|w| w[1] > w[0] - 1e-12));
    }
}

#[test]
fn optimality_certificate() {
    let nd = unit_analysis();
    for h in [1.0, 1.97, 3.11, 5.0] {
        // t^{d-2} p'(u(t)) is one constant along the arcs, and every node
        // slope minimizes p(w) + mu t^{2-d} w
        let (body, _) = nd.solve(h).unwrap();
        let (front, rear) = (nd.flow.front_curve.as_ref(), nd.flow.rear_curve.as_ref());
        let (spread, gap) = nd_certificate(front, rear, &body, &slope_grid(60.0));
        assert!(spread < 1e-8, "h = {h}: multiplier varies by {spread}");
        assert!(gap < 1e-9, "h = {h}: {gap}");
    }
}

#[test]
fn perturbations_never_help() {
    let nd = unit_analysis();
    let (front, rear) = (nd.flow.front_curve.as_ref(), nd.flow.rear_curve.as_ref());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for h in [1.97, 3.11] {
        let (body, _) = nd.solve_with_nodes(h, 2048).unwrap();
        let base = body.resistance(front, rear);
        for k in 0..40 {
            let eps = [1e-2, 0.1, 0.5][k % 3];
            let other = perturb(&mut rng, &body, eps);
            other.validate().unwrap();
            let r = other.resistance(front, rear);
            assert!(r >= base - 1e-9, "h = {h}, eps = {eps}: {r} < {base}");
        }
    }
}

#[test]
fn bad_arguments() {
    assert!(matches!(solve_nd(&FlowContext::gaussian(2, 1.0).unwrap(), 1.0), Err(Error::Domain(_))));
    assert!(matches!(solve_nd(&FlowContext::gaussian(3, 1.0).unwrap(), -1.0), Err(Error::Domain(_))));
    let env = build_envelope(Arc::new(NewtonCurve)).unwrap();
    assert!(matches!(QTransform::new(env, 2), Err(Error::Domain(_))));
}

#[test]
fn four_dimensions_run() {
    let (body, r) = solve_nd(&FlowContext::gaussian(4, 1.0).unwrap(), 2.0).unwrap();
    body.validate().unwrap();
    assert!(r.diagnostics.value_residual < 1e-6);
}
