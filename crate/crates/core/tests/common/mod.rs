#![allow(dead_code)]

use minres::pressure::Curve;
use minres::profile::{ProfilePoint, SideProfile};
use minres::BodyProfile;
use rand::Rng;

/// Slopes realized on a side (segments of positive length), deduplicated.
pub fn realized_slopes(side: &SideProfile) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in &side.points {
        if let Some(u) = p.u {
            if !out.iter().any(|x| (x - u).abs() < 1e-12) {
                out.push(u);
            }
        }
    }
    if out.is_empty() {
        for (_, _, s) in side.segments() {
            if !out.iter().any(|x| (x - s).abs() < 1e-12) {
                out.push(s);
            }
        }
    }
    out
}

/// Largest amount by which some grid slope `w` beats a realized slope `s`
/// in `p(w) - lambda w`; non-positive means the certificate holds.
pub fn certificate_violation(p: &dyn Curve, lambda: f64, realized: &[f64], grid: &[f64]) -> f64 {
    let best = grid.iter().map(|&w| p.value(w) - lambda * w).fold(f64::INFINITY, f64::min);
    realized.iter().map(|&s| (p.value(s) - lambda * s) - best).fold(f64::NEG_INFINITY, f64::max)
}

/// Multiplier of a two-dimensional side from the raw curve: the chord slope
/// between two realized slopes, or `p'` at a single one.
pub fn chord_multiplier(p: &dyn Curve, slopes: &[f64]) -> f64 {
    match slopes {
        [s] => p.derivative(*s),
        [a, b, ..] => (p.value(*b) - p.value(*a)) / (b - a),
        [] => panic!("no slopes"),
    }
}

/// 1000 slopes, dense near the origin and reaching out to `umax`.
pub fn slope_grid(umax: f64) -> Vec<f64> {
    (0..1000).map(|k| umax * (k as f64 / 999.0).powi(2)).collect()
}

/// Random convex, non-decreasing side of height `h` with a few pieces.
pub fn random_side<R: Rng>(rng: &mut R, h: f64) -> SideProfile {
    if h <= 0.0 {
        return SideProfile::flat();
    }
    // at least two pieces, so a blend always moves a one-slope side
    let k = rng.gen_range(2..6);
    let mut slopes: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
    slopes.sort_by(f64::total_cmp);
    let mut widths: Vec<f64> = (0..k).map(|_| 0.05 + rng.gen::<f64>()).collect();
    let total: f64 = widths.iter().sum();
    widths.iter_mut().for_each(|w| *w /= total);
    let rise: f64 = slopes.iter().zip(&widths).map(|(s, w)| s * w).sum();
    let scale = h / rise.max(1e-12);
    let mut points = vec![ProfilePoint::new(0.0, -h)];
    let (mut t, mut y) = (0.0, -h);
    for (s, w) in slopes.iter().zip(&widths) {
        t += w;
        y += s * scale * w;
        points.push(ProfilePoint::new(t, y));
    }
    let last = points.len() - 1;
    points[last] = ProfilePoint::new(1.0, 0.0);
    SideProfile { points }
}

/// `(1 - eps) a + eps b` on the merged breakpoints; convexity is preserved.
pub fn blend(a: &SideProfile, b: &SideProfile, eps: f64) -> SideProfile {
    let mut ts: Vec<f64> = a.points.iter().chain(&b.points).map(|p| p.t).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    let points =
        ts.into_iter().map(|t| ProfilePoint::new(t, (1.0 - eps) * a.value_at(t) + eps * b.value_at(t))).collect();
    SideProfile { points }
}

/// A random admissible body of the same total height, blended into `body`.
pub fn perturb<R: Rng>(rng: &mut R, body: &BodyProfile, eps: f64) -> BodyProfile {
    let shift = (rng.gen::<f64>() - 0.5) * 0.5 * body.h;
    let hp = (body.h_plus + shift).clamp(0.0, body.h);
    let hm = body.h - hp;
    let gp = random_side(rng, hp);
    let gm = random_side(rng, hm);
    let f_plus = blend(&body.f_plus, &gp, eps);
    let f_minus = blend(&body.f_minus, &gm, eps);
    BodyProfile { h_plus: f_plus.height(), h_minus: f_minus.height(), f_plus, f_minus, ..body.clone() }
}

/// Certificate for d >= 3 optimal bodies. Returns the relative spread of
/// the multiplier `mu = -t^{d-2} p'(u(t))` along the front arc and the
/// largest amount by which a grid slope beats a node slope in
/// `p(w) + mu t^{2-d} w`. A flat side is tested at the rim.
pub fn nd_certificate(front: &dyn Curve, rear: &dyn Curve, body: &BodyProfile, grid: &[f64]) -> (f64, f64) {
    let d = body.d as i32;
    let arc = |side: &SideProfile| -> Vec<(f64, f64)> {
        side.points.iter().filter(|p| p.parametric && p.t > 0.0).filter_map(|p| p.u.map(|u| (p.t, u))).collect()
    };
    let mus: Vec<f64> = arc(&body.f_plus).iter().map(|&(t, u)| -t.powi(d - 2) * front.derivative(u)).collect();
    let mu = mus[mus.len() / 2];
    let spread = mus.iter().map(|m| (m - mu).abs()).fold(0.0, f64::max) / mu;
    let mut worst = f64::NEG_INFINITY;
    for (side, curve) in [(&body.f_plus, front), (&body.f_minus, rear)] {
        let on_grid: Vec<(f64, f64)> = grid.iter().map(|&w| (w, curve.value(w))).collect();
        let mut nodes = arc(side);
        if nodes.is_empty() {
            nodes.push((1.0, 0.0));
        }
        for (t, u) in nodes {
            let lambda = -mu / t.powi(d - 2);
            let best = on_grid.iter().map(|&(w, p)| p - lambda * w).fold(f64::INFINITY, f64::min);
            worst = worst.max(curve.value(u) - lambda * u - best);
        }
    }
    (spread, worst)
}
