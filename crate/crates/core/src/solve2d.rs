//! The two-dimensional problem: each side is optimized by a one- or
//! two-slope profile read off the envelope, and the height split minimizes
//! `pbar_+(z) + pbar_-(h - z)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::EnvelopeAnalysis;
use crate::error::{Error, Result};
use crate::flow::{check_height, Diagnostics, FlowAnalysis, Landmarks, SolveReport};
use crate::pressure::{Curve, FlowContext};
use crate::profile::{BodyProfile, SideProfile, SolutionKind};
use crate::roots::brent;

/// Optimal side profile of height `h` and its resistance `pbar(h)`.
///
/// Inside a component `(lo, hi)` of the contact complement the profile has
/// slope `lo` on `[0, t0]` and `hi` on `[t0, 1]`, `t0 = (hi - h)/(hi - lo)`;
/// outside it is the straight segment of slope `h`.
pub fn minimize_side_2d(env: &EnvelopeAnalysis, h: f64) -> Result<(SideProfile, f64)> {
    if !(h.is_finite() && h >= 0.0) {
        return Err(Error::Domain(format!("side height must be non-negative, got {h}")));
    }
    if h == 0.0 {
        return Ok((SideProfile::flat(), env.pbar(0.0)));
    }
    let (lo, hi) = env.component_of(h);
    Ok((SideProfile::two_slopes(h, lo, hi), env.pbar(h)))
}

pub fn solve_2d(ctx: &FlowContext, h: f64) -> Result<(BodyProfile, SolveReport)> {
    if ctx.dim() != 2 {
        return Err(Error::Domain(format!("solve_2d needs d = 2, got d = {}", ctx.dim())));
    }
    check_height(h)?;
    solve_2d_with(&FlowAnalysis::new(ctx)?, h)
}

pub fn solve_2d_with(fa: &FlowAnalysis, h: f64) -> Result<(BodyProfile, SolveReport)> {
    check_height(h)?;
    if fa.dim() != 2 {
        return Err(Error::Domain(format!("solve_2d needs d = 2, got d = {}", fa.dim())));
    }
    let Landmarks { u_plus0, b_plus, u_minus0, b_minus, u_star } = fa.landmarks;
    let (front, rear) = (&fa.front, &fa.rear);
    let p_plus = |u: f64| fa.front_curve.value(u);
    let p_minus0 = fa.rear_curve.value(0.0);
    let mut diag = Diagnostics {
        tie: front.has_tie() || rear.has_tie(),
        tangency_residual: front.tangency_residual().max(rear.tangency_residual()),
        ..Diagnostics::default()
    };

    let (kind, h_plus, r) = if h < u_plus0 {
        (SolutionKind::Trapezium, h, p_plus(0.0) - b_plus * h + p_minus0)
    } else if h <= u_star {
        (SolutionKind::IsoscelesTriangle, h, p_plus(h) + p_minus0)
    } else if h < u_star + u_minus0 {
        (SolutionKind::TriangleTrapezium, u_star, p_plus(u_star) + p_minus0 - b_minus * (h - u_star))
    } else {
        let g = |z: f64| front.pbar_slope(z) - rear.pbar_slope(h - z);
        let hi = h - u_minus0;
        let root = if g(hi) <= 0.0 {
            crate::roots::Root { x: hi, residual: g(hi).abs(), iterations: 0 }
        } else {
            brent(g, u_plus0, hi, 1e-15 * (1.0 + h), 1e-12 * b_plus, 200)?
        };
        diag.root_residual = root.residual;
        diag.iterations = root.iterations;
        let (z, hm) = (root.x, h - root.x);
        let kind = match rear.component_index(hm) {
            Some(k) if k > 0 => SolutionKind::TwoTrianglesTrapezium,
            _ => SolutionKind::TwoTriangles,
        };
        (kind, z, p_plus(z) + rear.pbar(hm))
    };
    let h_minus = h - h_plus;
    let (f_plus, _) = minimize_side_2d(front, h_plus)?;
    let (f_minus, _) = minimize_side_2d(rear, h_minus)?;
    let body = BodyProfile { d: 2, h, h_plus, h_minus, kind, f_plus, f_minus };
    diag.value_residual = (body.resistance(fa.front_curve.as_ref(), fa.rear_curve.as_ref()) - r).abs();
    let report = SolveReport::new(fa, h, r, &body, None, diag);
    Ok((body, report))
}

/// One row of the region map: the three boundary heights at speed `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionRow {
    #[serde(rename = "V")]
    pub v: f64,
    pub u_plus0: f64,
    pub u_star: f64,
    pub u_star_plus_u_minus0: f64,
}

/// A context equal to `template` except for the speed.
pub fn at_speed(template: &FlowContext, v: f64) -> Result<FlowContext> {
    let mut ctx = FlowContext::with_density(template.density.clone(), v)?.with_backend(template.backend);
    ctx.quad_rel = template.quad_rel;
    Ok(ctx)
}

fn check_grid(v_grid: &[f64]) -> Result<()> {
    if v_grid.is_empty() {
        return Err(Error::Input("empty V grid".into()));
    }
    if v_grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Domain("V grid must be positive".into()));
    }
    if v_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("V grid must be increasing".into()));
    }
    Ok(())
}

/// Landmarks at every grid speed, computed in parallel; failures are kept
/// per point.
pub fn landmarks_on_grid(template: &FlowContext, v_grid: &[f64]) -> Result<Vec<Result<Landmarks>>> {
    check_grid(v_grid)?;
    Ok(v_grid.par_iter().map(|&v| Ok(FlowAnalysis::new(&at_speed(template, v)?)?.landmarks)).collect())
}

/// The curves `u_+^0(V)`, `u*(V)` and `u*(V) + u_-^0(V)` separating the four
/// generic solution kinds.
pub fn region_curves_2d(template: &FlowContext, v_grid: &[f64]) -> Result<Vec<RegionRow>> {
    if template.dim() != 2 {
        return Err(Error::Domain(format!("region curves need d = 2, got d = {}", template.dim())));
    }
    let all = landmarks_on_grid(template, v_grid)?;
    v_grid
        .iter()
        .zip(all)
        .map(|(&v, lm)| {
            let lm = lm.map_err(|e| e.at_speed(v))?;
            Ok(RegionRow { v, u_plus0: lm.u_plus0, u_star: lm.u_star, u_star_plus_u_minus0: lm.u_star + lm.u_minus0 })
        })
        .collect()
}
