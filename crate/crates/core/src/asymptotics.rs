//! Slow-body (`V -> 0`) and fast-body (`V -> inf`) limits.
//!
//! For small `V`, `p_eps(u) = eps b + V c / sqrt(1 + u^2) + o(V)`; the
//! optimal body becomes symmetric and independent of `sigma` up to the factor
//! `c`. For large `V`, `p_+ / V^2 -> 1/(1 + u^2)`, `p_- / V^2 -> 0`, and the
//! problem reduces to Newton's.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::envelope::build_envelope;
use crate::error::{Error, Result};
use crate::medium::{moment, RadialDensity};
use crate::pressure::{Curve, Side};
use crate::profile::{BodyProfile, ProfilePoint, SideProfile, SolutionKind};
use crate::roots::brent;
use crate::solve_nd::{QTransform, EXPORT_NODES};

/// `a = sqrt((1 + sqrt 5)/2)`, the positive root of `a^4 = a^2 + 1`.
pub fn golden_a() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCoefficients {
    pub d: usize,
    pub b: f64,
    pub c: f64,
    pub a: f64,
}

pub fn limit_coefficients(density: &RadialDensity) -> Result<LimitCoefficients> {
    let d = density.dim();
    let (b, c) = match d {
        2 => (0.5 * PI * moment(density, 3)?, 4.0 * moment(density, 2)?),
        3 => (2.0 * PI / 3.0 * moment(density, 4)?, 2.0 * PI * moment(density, 3)?),
        _ => return Err(Error::Unsupported(format!("small-V coefficients are only available for d = 2, 3 (got {d})"))),
    };
    Ok(LimitCoefficients { d, b, c, a: golden_a() })
}

/// Two-term small-`V` pressure `eps b + V c / sqrt(1 + u^2)`.
pub fn small_v_pressure(side: Side, u: f64, v: f64, k: &LimitCoefficients) -> f64 {
    side.eps() * k.b + v * k.c / (1.0 + u * u).sqrt()
}

/// `1/sqrt(1 + u^2)`: shape of the `V`-linear term of the slow-body pressure.
#[derive(Debug, Clone, Copy, Default)]
pub struct SlowCurve;

impl Curve for SlowCurve {
    fn eval(&self, u: f64) -> (f64, f64) {
        if u.is_infinite() {
            return (0.0, 0.0);
        }
        let s = 1.0 + u * u;
        (1.0 / s.sqrt(), -u / (s * s.sqrt()))
    }
}

/// `1/(1 + u^2)`: Newton's pressure, the fast-body limit of `p_+ / V^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NewtonCurve;

impl Curve for NewtonCurve {
    fn eval(&self, u: f64) -> (f64, f64) {
        if u.is_infinite() {
            return (0.0, 0.0);
        }
        let s = 1.0 + u * u;
        (1.0 / s, -2.0 * u / (s * s))
    }
}

/// Envelope of [`SlowCurve`]: the tangent `1 - a^{-5} u` up to `a`, then the curve.
pub fn slow_pbar(u: f64) -> f64 {
    let a = golden_a();
    if u <= a {
        1.0 - u / a.powi(5)
    } else {
        1.0 / (1.0 + u * u).sqrt()
    }
}

/// Closed-form `q` for the slow-body curve in d = 3.
pub fn slow_q(u: f64) -> f64 {
    let a = golden_a();
    if u <= a {
        a.powi(5)
    } else {
        (1.0 + u * u).powf(1.5) / u
    }
}

/// Closed-form `Q = int_0^u q` for the slow-body curve in d = 3.
pub fn slow_cum_q(u: f64) -> f64 {
    let a = golden_a();
    if u <= a {
        return a.powi(5) * u;
    }
    let s = (1.0 + u * u).sqrt();
    s * (4.0 + u * u) / 3.0 + (2.0 + a * a) / 3.0 + ((s - 1.0) / u).ln() - ((a * a - 1.0) / a).ln()
}

/// A limit-case body with its resistance in the natural scale of the limit:
/// `R / V` for slow bodies, `R / V^2` for fast ones.
#[derive(Debug, Clone, Serialize)]
pub struct LimitSolution {
    pub body: BodyProfile,
    pub reduced_resistance: f64,
}

/// Optimal body as `V -> 0`. `c` is the density factor `c^{(d)}`.
pub fn limit_profile_small_v(d: usize, h: f64, c: f64) -> Result<LimitSolution> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("height h must be positive, got {h}")));
    }
    let a = golden_a();
    match d {
        2 => {
            let (kind, hp) = if h < a {
                (SolutionKind::Trapezium, h)
            } else if h == a {
                (SolutionKind::IsoscelesTriangle, h)
            } else if h < 2.0 * a {
                (SolutionKind::TriangleTrapezium, a)
            } else {
                (SolutionKind::TwoTriangles, 0.5 * h)
            };
            let side =
                |x: f64| if x < a { SideProfile::two_slopes(x, 0.0, a) } else { SideProfile::two_slopes(x, x, x) };
            let body = BodyProfile { d, h, h_plus: hp, h_minus: h - hp, kind, f_plus: side(hp), f_minus: side(h - hp) };
            Ok(LimitSolution { body, reduced_resistance: 2.0 * c * slow_pbar(0.5 * h) })
        }
        3 => {
            let half = 0.5 * h;
            let big_u = slow_solve_u(half)?;
            let side = slow_profile_3d(half, big_u, EXPORT_NODES);
            let qu = slow_q(big_u);
            let value = slow_pbar(big_u) + slow_cum_q(big_u) / (qu * qu);
            let body = BodyProfile {
                d,
                h,
                h_plus: half,
                h_minus: half,
                kind: SolutionKind::Second,
                f_plus: side.clone(),
                f_minus: side,
            };
            Ok(LimitSolution { body, reduced_resistance: 2.0 * c * value })
        }
        _ => Err(Error::Unsupported(format!("slow-body limit is only available for d = 2, 3 (got {d})"))),
    }
}

/// `U` with `U - Q(U)/q(U) = h` for the closed-form slow-body `q`, `Q`.
pub fn slow_solve_u(h: f64) -> Result<f64> {
    let a = golden_a();
    let g = |u: f64| u - slow_cum_q(u) / slow_q(u) - h;
    let mut hi = 2.0 * a + h;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    Ok(brent(g, a, hi, 1e-15 * hi, 0.0, 200)?.x)
}

fn slow_profile_3d(h: f64, big_u: f64, n: usize) -> SideProfile {
    let a = golden_a();
    let qu = slow_q(big_u);
    let t0 = slow_q(0.0) / qu;
    let mut points = vec![ProfilePoint { t: 0.0, y: -h, u: Some(0.0), parametric: false }];
    points.push(ProfilePoint { t: t0, y: -h, u: Some(a), parametric: false });
    let mut last = t0;
    for j in 1..n {
        let u = a + (big_u - a) * 0.5 * (1.0 - (PI * j as f64 / n as f64).cos());
        let t = slow_q(u) / qu;
        if t <= last + 1e-13 || t >= 1.0 - 1e-13 {
            continue;
        }
        let y = -h + (u * slow_q(u) - slow_cum_q(u)) / qu;
        points.push(ProfilePoint { t, y: y.min(0.0), u: Some(u), parametric: true });
        last = t;
    }
    points.push(ProfilePoint { t: 1.0, y: 0.0, u: None, parametric: true });
    SideProfile { points }
}

/// Newton's optimal body of height `h` (flat rear). `nu` is the flux density.
pub fn limit_profile_large_v(d: usize, h: f64, nu: f64) -> Result<LimitSolution> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("height h must be positive, got {h}")));
    }
    match d {
        2 => {
            let (kind, f_plus, value) = if h < 1.0 {
                (SolutionKind::Trapezium, SideProfile::two_slopes(h, 0.0, 1.0), 1.0 - 0.5 * h)
            } else {
                (SolutionKind::IsoscelesTriangle, SideProfile::two_slopes(h, h, h), 1.0 / (1.0 + h * h))
            };
            let body = BodyProfile { d, h, h_plus: h, h_minus: 0.0, kind, f_plus, f_minus: SideProfile::flat() };
            Ok(LimitSolution { body, reduced_resistance: nu * value })
        }
        _ if d >= 3 => {
            let qt = newton_transform(d)?;
            let big_u = qt.solve_u(h)?;
            let body = BodyProfile {
                d,
                h,
                h_plus: h,
                h_minus: 0.0,
                kind: SolutionKind::First,
                f_plus: qt.profile(h, big_u, EXPORT_NODES),
                f_minus: SideProfile::flat(),
            };
            Ok(LimitSolution { body, reduced_resistance: nu * qt.side_value(big_u) })
        }
        _ => Err(Error::Domain(format!("dimension must be at least 2, got {d}"))),
    }
}

/// The q/Q transform of Newton's pressure in dimension `d`.
pub fn newton_transform(d: usize) -> Result<QTransform> {
    QTransform::new(build_envelope(Arc::new(NewtonCurve))?, d)
}
