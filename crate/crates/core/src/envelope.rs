//! Convex envelope `pbar` of a pressure function and its contact complement
//! `O_p = {u : pbar(u) < p(u)}`, a union of open intervals on each of which
//! `pbar` is affine.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pressure::{Curve, CurveSample};
use crate::roots::brent;

/// One interval `(lo, hi)` of the contact complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContactInterval {
    pub lo: f64,
    pub hi: f64,
    /// Slope of the supporting segment.
    pub slope: f64,
    /// `p(lo)`, the value at the left contact point.
    pub p_lo: f64,
    /// Set when an interior point (nearly) touches the segment, i.e. the
    /// bitangent meets the curve more than twice.
    pub tie: bool,
}

impl ContactInterval {
    pub fn line(&self, u: f64) -> f64 {
        self.p_lo + self.slope * (u - self.lo)
    }
}

/// Envelope of one curve.
#[derive(Clone)]
pub struct EnvelopeAnalysis {
    curve: Arc<dyn Curve>,
    samples: Vec<CurveSample>,
    tail: f64,
    components: Vec<ContactInterval>,
    tangency_residual: f64,
}

impl std::fmt::Debug for EnvelopeAnalysis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnvelopeAnalysis")
            .field("tail", &self.tail)
            .field("components", &self.components)
            .field("tangency_residual", &self.tangency_residual)
            .finish()
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower convex hull (monotone chain) of points sorted by abscissa; returns
/// vertex indices. Collinear points are dropped.
pub fn lower_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..pts.len() {
        while hull.len() >= 2 && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) <= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    hull
}

/// Builds the envelope of `curve`.
///
/// Requires `p(u) > p(inf)` at every sample. Components narrower than the
/// sample spacing are not resolved.
pub fn build_envelope(curve: Arc<dyn Curve>) -> Result<EnvelopeAnalysis> {
    let samples = curve.samples();
    let tail = curve.tail();
    if samples.len() < 8 {
        return Err(Error::Input("too few samples for an envelope".into()));
    }
    if let Some(s) = samples.iter().find(|s| !(s.p > tail)) {
        return Err(Error::Precondition(format!("p({}) = {} does not exceed p(inf) = {}", s.u, s.p, tail)));
    }
    let scale = samples[0].p - tail;
    let gap_tol = 1e-9 * scale;
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.u, s.p)).collect();
    let hull = lower_hull(&pts);
    if *hull.last().expect("non-empty") != samples.len() - 1 {
        return Err(Error::Invariant("hull does not end at the last sample".into()));
    }

    let mut raw: Vec<(usize, usize)> = Vec::new();
    for w in hull.windows(2) {
        let (i, j) = (w[0], w[1]);
        if j <= i + 1 {
            continue;
        }
        let m = (pts[j].1 - pts[i].1) / (pts[j].0 - pts[i].0);
        let gap = (i + 1..j).map(|k| pts[k].1 - (pts[i].1 + m * (pts[k].0 - pts[i].0))).fold(0.0, f64::max);
        if gap > gap_tol {
            raw.push((i, j));
        }
    }
    if raw.last().is_some_and(|&(_, j)| j == samples.len() - 1) {
        return Err(Error::numeric("contact interval extends past the sampled range", f64::NAN));
    }

    let mut env = EnvelopeAnalysis { curve, samples, tail, components: Vec::new(), tangency_residual: 0.0 };
    let mut comps: Vec<ContactInterval> = Vec::new();
    for &(i, j) in &raw {
        let c = env.refine(i, j)?;
        // merge touching components into one segment
        if let Some(prev) = comps.last_mut() {
            if (c.lo - prev.hi).abs() <= 1e-8 * (1.0 + c.lo.abs()) {
                let lo_idx = env.index_near(prev.lo);
                let mut merged = env.refine(lo_idx, j)?;
                merged.tie = true;
                *prev = merged;
                continue;
            }
        }
        comps.push(c);
    }
    for c in comps.iter_mut() {
        let lo_i = env.index_near(c.lo) + 2;
        let hi_i = env.index_near(c.hi).saturating_sub(2);
        for k in lo_i..hi_i.max(lo_i) {
            let s = env.samples[k];
            if s.p - c.line(s.u) < gap_tol {
                c.tie = true;
            }
        }
    }
    let mut resid = 0.0f64;
    for c in &comps {
        if c.lo > 0.0 {
            resid = resid.max((env.curve.derivative(c.lo) - c.slope).abs());
        }
        resid = resid.max((env.curve.derivative(c.hi) - c.slope).abs());
    }
    env.components = comps;
    env.tangency_residual = resid;
    Ok(env)
}

impl EnvelopeAnalysis {
    fn index_near(&self, u: f64) -> usize {
        match self.samples.binary_search_by(|s| s.u.total_cmp(&u)) {
            Ok(i) => i,
            Err(i) => i.min(self.samples.len() - 1),
        }
    }

    /// Solves `p'(x) (x - a) = p(x) - pa` for a contact point `x` near sample
    /// `k`, i.e. the tangent to the curve through `(a, pa)`.
    fn tangent_from(&self, a: f64, pa: f64, k: usize) -> Result<f64> {
        let g = |x: f64| {
            let (p, dp) = self.curve.eval(x);
            dp * (x - a) - (p - pa)
        };
        let n = self.samples.len();
        for reach in 1..=8usize {
            let lo = k.saturating_sub(reach);
            let hi = (k + reach).min(n - 1);
            let (mut xl, mut xr) = (self.samples[lo].u, self.samples[hi].u);
            // keep the bracket on one side of the fixed point
            if a < self.samples[k].u {
                xl = xl.max(a + 1e-9 * (1.0 + a.abs()));
            } else {
                xr = xr.min(a - 1e-9 * (1.0 + a.abs()));
            }
            if xr <= xl {
                continue;
            }
            let (gl, gr) = (g(xl), g(xr));
            if gl.signum() != gr.signum() {
                let tol = 1e-15 * (1.0 + self.samples[k].u);
                return Ok(brent(g, xl, xr, tol, 0.0, 200)?.x);
            }
        }
        Err(Error::numeric(format!("no tangency point near u = {}", self.samples[k].u), f64::NAN))
    }

    /// Refines the hull edge between samples `i < j` to exact tangency.
    fn refine(&self, i: usize, j: usize) -> Result<ContactInterval> {
        let p = |x: f64| self.curve.value(x);
        if i == 0 {
            let p0 = self.samples[0].p;
            let b = self.tangent_from(0.0, p0, j)?;
            let pb = p(b);
            return Ok(ContactInterval { lo: 0.0, hi: b, slope: (pb - p0) / b, p_lo: p0, tie: false });
        }
        let (mut a, mut b) = (self.samples[i].u, self.samples[j].u);
        for _ in 0..60 {
            let nb = self.tangent_from(a, p(a), j)?;
            let na = self.tangent_from(nb, p(nb), i)?;
            let change = (na - a).abs() + (nb - b).abs();
            a = na;
            b = nb;
            if change <= 1e-14 * (1.0 + b) {
                break;
            }
        }
        let (pa, pb) = (p(a), p(b));
        Ok(ContactInterval { lo: a, hi: b, slope: (pb - pa) / (b - a), p_lo: pa, tie: false })
    }

    pub fn curve(&self) -> &Arc<dyn Curve> {
        &self.curve
    }

    pub fn components(&self) -> &[ContactInterval] {
        &self.components
    }

    pub fn tail_value(&self) -> f64 {
        self.tail
    }

    /// Largest mismatch between the segment slope and `p'` at contact points.
    pub fn tangency_residual(&self) -> f64 {
        self.tangency_residual
    }

    pub fn has_tie(&self) -> bool {
        self.components.iter().any(|c| c.tie)
    }

    fn containing(&self, u: f64) -> Option<&ContactInterval> {
        // half-open, so that pbar'(0) is the right derivative -B
        let k = self.components.partition_point(|c| c.hi <= u);
        self.components.get(k).filter(|c| c.lo <= u && u < c.hi)
    }

    /// `(pbar(u), pbar'(u))`.
    pub fn eval_envelope(&self, u: f64) -> (f64, f64) {
        match self.containing(u) {
            Some(c) => (c.line(u), c.slope),
            None => self.curve.eval(u),
        }
    }

    pub fn pbar(&self, u: f64) -> f64 {
        self.eval_envelope(u).0
    }

    pub fn pbar_slope(&self, u: f64) -> f64 {
        self.eval_envelope(u).1
    }

    /// The component of `O_p` containing `h`, or `[h, h]` outside `O_p`.
    pub fn component_of(&self, h: f64) -> (f64, f64) {
        match self.component_index(h) {
            Some(k) => (self.components[k].lo, self.components[k].hi),
            None => (h, h),
        }
    }

    /// `u^0`: right end of the component starting at the origin (0 if none).
    pub fn u0(&self) -> f64 {
        match self.components.first() {
            Some(c) if c.lo == 0.0 => c.hi,
            _ => 0.0,
        }
    }

    /// `B = -pbar'(0)`.
    pub fn b(&self) -> f64 {
        match self.components.first() {
            Some(c) if c.lo == 0.0 => -c.slope,
            _ => -self.curve.derivative(0.0),
        }
    }

    /// Index of the component containing `u` (strictly inside).
    pub fn component_index(&self, u: f64) -> Option<usize> {
        let k = self.components.partition_point(|c| c.hi <= u);
        self.components.get(k).filter(|c| c.lo < u && u < c.hi).map(|_| k)
    }

    /// Sample grid of `(u, pbar, pbar')`.
    pub fn envelope_samples(&self) -> Vec<CurveSample> {
        self.samples
            .iter()
            .map(|s| {
                let (p, dp) = self.eval_envelope(s.u);
                CurveSample { u: s.u, p, dp }
            })
            .collect()
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    /// Intervals as `[[lo, hi], ...]`.
    pub fn intervals(&self) -> Vec<[f64; 2]> {
        self.components.iter().map(|c| [c.lo, c.hi]).collect()
    }
}

impl Curve for EnvelopeAnalysis {
    fn eval(&self, u: f64) -> (f64, f64) {
        self.eval_envelope(u)
    }

    fn tail(&self) -> f64 {
        self.tail
    }

    fn samples(&self) -> Vec<CurveSample> {
        self.envelope_samples()
    }
}

/// `(u^0, B)` of an envelope.
pub fn landmark_u0_b(env: &EnvelopeAnalysis) -> (f64, f64) {
    (env.u0(), env.b())
}

/// Root `u*` of `pbar_+'(u) + B_- = 0` on `(u_+^0, inf)`.
pub fn find_u_star(front: &EnvelopeAnalysis, rear: &EnvelopeAnalysis) -> Result<f64> {
    let (bp, bm) = (front.b(), rear.b());
    if !(bp > bm) {
        return Err(Error::Precondition(format!("expected B_+ > B_-, got {bp} <= {bm}")));
    }
    let u0 = front.u0();
    let f = |u: f64| front.pbar_slope(u) + bm;
    let s = front.samples();
    let start = s.partition_point(|x| x.u <= u0);
    let mut lo = u0;
    for x in &s[start..] {
        if f(x.u) > 0.0 {
            let r = brent(f, lo, x.u, 1e-15 * (1.0 + x.u), 0.0, 200)?;
            return Ok(r.x);
        }
        lo = x.u;
    }
    Err(Error::numeric("u* lies beyond the sampled range", f(lo)))
}
