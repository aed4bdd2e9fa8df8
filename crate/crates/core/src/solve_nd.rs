//! The problem in dimension `d >= 3`.
//!
//! With `q(u) = |pbar'(u)|^{-1/(d-2)}` and `Q(u) = int_0^u q`, the optimal
//! side of height `h` is the curve `t = q(u)/q(U)`, `f = -h + (u q(u) - Q(u))/q(U)`
//! for `u` in `[0, U]`, where `U - Q(U)/q(U) = h`. Its resistance is
//! `pbar(U) + Q(U)/q(U)^{d-1}`.

use std::f64::consts::FRAC_PI_2;

use crate::envelope::EnvelopeAnalysis;
use crate::error::{Error, Result};
use crate::flow::{check_height, Diagnostics, FlowAnalysis, SolveReport};
use crate::pressure::FlowContext;
use crate::profile::{BodyProfile, ProfilePoint, SideProfile, SolutionKind};
use crate::quad::{integrate, QuadOptions, GL3};
use crate::roots::brent;

pub const EXPORT_NODES: usize = 256;

/// `q`, `Q` and the derived maps for one envelope, with `Q` tabulated on the
/// envelope sample grid (plus component endpoints).
#[derive(Debug, Clone)]
pub struct QTransform {
    env: EnvelopeAnalysis,
    d: usize,
    omega: f64,
    nodes: Vec<f64>,
    q_nodes: Vec<f64>,
    cq_nodes: Vec<f64>,
    h_nodes: Vec<f64>,
}

impl QTransform {
    pub fn new(env: EnvelopeAnalysis, d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::Domain(format!("q/Q transform needs d >= 3, got {d}")));
        }
        let omega = 1.0 / (d as f64 - 2.0);
        let mut nodes: Vec<f64> = env.samples().iter().map(|s| s.u).filter(|u| u.is_finite()).collect();
        for c in env.components() {
            nodes.push(c.lo);
            nodes.push(c.hi);
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let mut qt =
            QTransform { env, d, omega, nodes, q_nodes: Vec::new(), cq_nodes: Vec::new(), h_nodes: Vec::new() };
        let n = qt.nodes.len();
        let mut q_nodes = Vec::with_capacity(n);
        let samples = qt.env.samples();
        let on_edge = |u: f64| qt.env.components().iter().any(|c| c.lo <= u && u <= c.hi);
        for &u in &qt.nodes {
            // the raw samples already carry p' at grid points
            let slope = match samples.binary_search_by(|s| s.u.total_cmp(&u)) {
                Ok(i) if !on_edge(u) => samples[i].dp,
                _ => qt.env.pbar_slope(u),
            };
            q_nodes.push(qt.q_from_slope(slope)?);
        }
        let mut cq = vec![0.0; n];
        for k in 1..n {
            cq[k] = cq[k - 1] + qt.q_integral(qt.nodes[k - 1], qt.nodes[k]);
        }
        let h_nodes = (0..n).map(|k| qt.nodes[k] - cq[k] / q_nodes[k]).collect();
        qt.q_nodes = q_nodes;
        qt.cq_nodes = cq;
        qt.h_nodes = h_nodes;
        Ok(qt)
    }

    fn q_from_slope(&self, slope: f64) -> Result<f64> {
        if !(slope < 0.0) {
            return Err(Error::Precondition(format!("envelope slope {slope} is not negative")));
        }
        Ok((-slope).powf(-self.omega))
    }

    pub fn envelope(&self) -> &EnvelopeAnalysis {
        &self.env
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Largest tabulated slope; heights needing a larger `U` are rejected.
    pub fn max_u(&self) -> f64 {
        *self.nodes.last().expect("nodes")
    }

    pub fn q(&self, u: f64) -> f64 {
        (-self.env.pbar_slope(u)).powf(-self.omega)
    }

    // int_a^b q, with a and b in one node interval
    fn q_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if self.env.component_index(0.5 * (a + b)).is_some() {
            return self.q(0.5 * (a + b)) * (b - a);
        }
        let (pa, pb) = (a.atan(), b.atan().min(FRAC_PI_2));
        let (m, r) = (0.5 * (pa + pb), 0.5 * (pb - pa));
        GL3.iter()
            .map(|&(x, w)| {
                let phi = m + r * x;
                let c = phi.cos();
                w * self.q(phi.tan()) / (c * c)
            })
            .sum::<f64>()
            * r
    }

    /// `Q(u) = int_0^u q`.
    pub fn cum_q(&self, u: f64) -> f64 {
        let k = self.nodes.partition_point(|&x| x <= u).max(1) - 1;
        self.cq_nodes[k] + self.q_integral(self.nodes[k], u)
    }

    /// `h(u) = u - Q(u)/q(u)`, non-decreasing from 0.
    pub fn h_map(&self, u: f64) -> f64 {
        u - self.cum_q(u) / self.q(u)
    }

    /// `r(u) = pbar(u) + Q(u)/q(u)^{d-1}`, non-increasing.
    pub fn r_map(&self, u: f64) -> f64 {
        self.env.pbar(u) + self.cum_q(u) / self.q(u).powi(self.d as i32 - 1)
    }

    /// The canonical (largest) `U` with `h(U) = h`.
    pub fn solve_u(&self, h: f64) -> Result<f64> {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::Domain(format!("height must be non-negative, got {h}")));
        }
        let k = self.h_nodes.partition_point(|&x| x <= h);
        if k >= self.nodes.len() {
            return Err(Error::numeric(format!("height {h} needs slopes beyond the tabulated range"), f64::NAN));
        }
        let (lo, hi) = (self.nodes[k - 1], self.nodes[k]);
        let u = brent(|u| self.h_map(u) - h, lo, hi, 1e-15 * (1.0 + hi), 0.0, 200)?.x;
        Ok(self.snap(u))
    }

    // moves u to the right end of a flat stretch of h(u)
    fn snap(&self, u: f64) -> f64 {
        for c in self.env.components() {
            if c.lo <= u && u < c.hi {
                return c.hi;
            }
        }
        u
    }

    /// Optimal side of height `h` with its `U`, sampled at `n` Chebyshev
    /// nodes in `u` plus all contact points.
    pub fn profile(&self, h: f64, big_u: f64, n: usize) -> SideProfile {
        if h == 0.0 {
            return SideProfile::flat();
        }
        let q_u = self.q(big_u);
        let t0 = self.q(0.0) / q_u;
        let mut us: Vec<f64> =
            (0..n).map(|j| 0.5 * big_u * (1.0 - (std::f64::consts::PI * j as f64 / (n - 1) as f64).cos())).collect();
        for c in self.env.components() {
            for x in [c.lo, c.hi] {
                if x < big_u {
                    us.push(x);
                }
            }
        }
        us.sort_by(f64::total_cmp);
        let mut points = vec![ProfilePoint { t: 0.0, y: -h, u: Some(0.0), parametric: false }];
        let mut last_t = 0.0;
        if t0 < 1.0 {
            let u0 = self.env.u0();
            points.push(ProfilePoint { t: t0, y: -h, u: Some(u0), parametric: false });
            last_t = t0;
        }
        for &u in &us {
            if self.env.component_index(u).is_some() {
                continue;
            }
            let q = self.q(u);
            let t = q / q_u;
            if t <= last_t + 1e-13 || t >= 1.0 - 1e-13 {
                continue;
            }
            let slope = self.snap(u);
            let y = -h + (u * q - self.cum_q(u)) / q_u;
            points.push(ProfilePoint { t, y: y.min(0.0), u: Some(slope), parametric: true });
            last_t = t;
        }
        points.push(ProfilePoint { t: 1.0, y: 0.0, u: None, parametric: t0 < 1.0 });
        SideProfile { points }
    }

    /// `pbar(U) + Q(U)/q(U)^{d-1}`.
    pub fn side_value(&self, big_u: f64) -> f64 {
        self.r_map(big_u)
    }

    /// Resistance of the optimal side computed from its definition,
    /// `p(0) t0^{d-1} + int_{t0}^1 p(u(t)) d(t^{d-1})`, where `u(t)` inverts
    /// `t = q(u)/q(U)`. Does not use `Q`.
    pub fn side_value_direct(&self, big_u: f64, rel: f64) -> Result<f64> {
        let dm1 = self.d as i32 - 1;
        let q_u = self.q(big_u);
        let t0 = self.q(0.0) / q_u;
        let curve = self.env.curve();
        let mut total = curve.value(0.0) * t0.powi(dm1);
        // t-breaks at corners of the arc
        let mut breaks = vec![t0];
        for c in self.env.components().iter().skip(1) {
            if c.hi <= big_u {
                breaks.push(self.q(c.lo) / q_u);
            }
        }
        breaks.push(1.0);
        let inv = |t: f64| -> f64 {
            let target = t * q_u;
            let k = self.q_nodes.partition_point(|&x| x < target).clamp(1, self.nodes.len() - 1);
            let (lo, hi) = (self.nodes[k - 1], self.nodes[k].min(big_u));
            if hi <= lo {
                return lo;
            }
            brent(|u| self.q(u) - target, lo, hi, 1e-15 * (1.0 + hi), 0.0, 200).map(|r| r.x).unwrap_or(hi)
        };
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let f = |t: f64| curve.value(inv(t)) * dm1 as f64 * t.powi(dm1 - 1);
            let r = integrate(f, w[0], w[1], QuadOptions { rel, max_intervals: 200 });
            total += r.value[0];
        }
        Ok(total)
    }

    /// `pbar'(U)` for the canonical `U` at height `z`.
    pub fn slope_at_height(&self, z: f64) -> Result<f64> {
        Ok(self.env.pbar_slope(self.solve_u(z)?))
    }
}

/// `h* = h_+(u*)`: the front height above which the rear side is curved too.
pub fn compute_h_star(front: &QTransform, u_star: f64) -> f64 {
    front.h_map(u_star)
}

/// A flow analysis with both q/Q transforms and `h*`.
#[derive(Debug, Clone)]
pub struct NdAnalysis {
    pub flow: FlowAnalysis,
    pub front: QTransform,
    pub rear: QTransform,
    pub h_star: f64,
    /// Compute the definition-based resistance check on every solve.
    pub direct_check: bool,
}

impl NdAnalysis {
    pub fn new(flow: FlowAnalysis) -> Result<Self> {
        let d = flow.dim();
        if d < 3 {
            return Err(Error::Domain(format!("solve_nd needs d >= 3, got d = {d}")));
        }
        let front = QTransform::new(flow.front.clone(), d)?;
        let rear = QTransform::new(flow.rear.clone(), d)?;
        let h_star = compute_h_star(&front, flow.landmarks.u_star);
        Ok(NdAnalysis { flow, front, rear, h_star, direct_check: true })
    }

    /// `(h_+, U_+, U_-)` for total height `h`.
    pub fn split(&self, h: f64) -> Result<(f64, f64, f64, Diagnostics)> {
        let mut diag = Diagnostics::default();
        if h <= self.h_star {
            return Ok((h, self.front.solve_u(h)?, 0.0, diag));
        }
        let g = |z: f64| -> f64 {
            match (self.front.slope_at_height(z), self.rear.slope_at_height(h - z)) {
                (Ok(a), Ok(b)) => a - b,
                _ => f64::NAN,
            }
        };
        let scale = self.flow.landmarks.b_plus;
        let root = brent(g, 0.0, h, 1e-15 * (1.0 + h), 1e-13 * scale, 200)?;
        diag.root_residual = root.residual;
        diag.iterations = root.iterations;
        let z = root.x;
        Ok((z, self.front.solve_u(z)?, self.rear.solve_u(h - z)?, diag))
    }

    pub fn solve(&self, h: f64) -> Result<(BodyProfile, SolveReport)> {
        self.solve_with_nodes(h, EXPORT_NODES)
    }

    pub fn solve_with_nodes(&self, h: f64, nodes: usize) -> Result<(BodyProfile, SolveReport)> {
        check_height(h)?;
        let d = self.flow.dim();
        let (h_plus, u_plus, u_minus, mut diag) = self.split(h)?;
        let h_minus = h - h_plus;
        let kind = if h_minus > 0.0 { SolutionKind::Second } else { SolutionKind::First };
        let r = self.front.side_value(u_plus) + self.rear.side_value(u_minus);
        let f_plus = self.front.profile(h_plus, u_plus, nodes.max(8));
        let f_minus = self.rear.profile(h_minus, u_minus, nodes.max(8));
        let body = BodyProfile { d, h, h_plus, h_minus, kind, f_plus, f_minus };
        diag.tie = self.flow.front.has_tie() || self.flow.rear.has_tie();
        diag.tangency_residual = self.flow.front.tangency_residual().max(self.flow.rear.tangency_residual());
        if self.direct_check {
            let direct = self.front.side_value_direct(u_plus, 1e-10)? + self.rear.side_value_direct(u_minus, 1e-10)?;
            diag.value_residual = (direct - r).abs();
        }
        let report = SolveReport::new(&self.flow, h, r, &body, Some(self.h_star), diag);
        Ok((body, report))
    }
}

pub fn solve_nd(ctx: &FlowContext, h: f64) -> Result<(BodyProfile, SolveReport)> {
    if ctx.dim() < 3 {
        return Err(Error::Domain(format!("solve_nd needs d >= 3, got d = {}", ctx.dim())));
    }
    check_height(h)?;
    NdAnalysis::new(FlowAnalysis::new(ctx)?)?.solve(h)
}

/// `h*(V)` on a grid of speeds.
pub fn h_star_curve(template: &FlowContext, v_grid: &[f64]) -> Result<Vec<Result<f64>>> {
    use rayon::prelude::*;
    if template.dim() < 3 {
        return Err(Error::Domain(format!("h* needs d >= 3, got d = {}", template.dim())));
    }
    if v_grid.is_empty() {
        return Err(Error::Input("empty V grid".into()));
    }
    Ok(v_grid
        .par_iter()
        .map(|&v| {
            let ctx = crate::solve2d::at_speed(template, v)?;
            let fa = FlowAnalysis::new(&ctx).map_err(|e| e.at_speed(v))?;
            let front = QTransform::new(fa.front.clone(), fa.dim())?;
            Ok(compute_h_star(&front, fa.landmarks.u_star))
        })
        .collect())
}
