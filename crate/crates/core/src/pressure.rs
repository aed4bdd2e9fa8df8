//! Pressure functions `p_+(u)` (front) and `p_-(u)` (rear) of a body moving
//! with speed `V` through a medium with radial velocity density `sigma`.
//!
//! Everything is evaluated in the angle `phi = atan(u)`, so `u = +inf` is the
//! ordinary point `phi = pi/2`. Each evaluation returns the pair
//! `(p(u), p'(u))`, with the derivative from a differentiated kernel rather
//! than finite differences.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{sphere_area, RadialDensity};
use crate::quad::{integrate_vec, integrate_vec_breaks, kronrod_rule, QuadOptions};

/// Front (`eps = +1`) or rear (`eps = -1`) side of the body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Front,
    Rear,
}

impl Side {
    pub fn eps(self) -> f64 {
        match self {
            Side::Front => 1.0,
            Side::Rear => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Closed forms for Gaussian-type densities in d = 2, 3; quadrature otherwise.
    #[default]
    Auto,
    GenericQuadrature,
    GaussianClosedForm2D,
    GaussianClosedForm3D,
}

/// Density, speed and numerical settings shared by everything downstream.
#[derive(Debug, Clone)]
pub struct FlowContext {
    pub density: Arc<RadialDensity>,
    pub v: f64,
    pub backend: Backend,
    /// Relative tolerance of the inner quadratures.
    pub quad_rel: f64,
}

impl FlowContext {
    pub fn new(density: RadialDensity, v: f64) -> Result<Self> {
        Self::with_density(Arc::new(density), v)
    }

    pub fn with_density(density: Arc<RadialDensity>, v: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("speed V must be positive and finite, got {v}")));
        }
        Ok(FlowContext { density, v, backend: Backend::Auto, quad_rel: 1e-12 })
    }

    pub fn gaussian(d: usize, v: f64) -> Result<Self> {
        Self::new(RadialDensity::gaussian(d)?, v)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn dim(&self) -> usize {
        self.density.dim()
    }

    pub(crate) fn quad(&self) -> QuadOptions {
        QuadOptions { rel: self.quad_rel, max_intervals: 400 }
    }
}

// ---------------------------------------------------------------------------
// Gaussian kernels

const SQRT_PI_2: f64 = 1.253_314_137_315_500_3;
const NEG_SPLIT: f64 = -2.0;

struct Laguerreish {
    s: Vec<f64>,
    w3: Vec<f64>,
    w4: Vec<f64>,
}

// Composite Kronrod nodes for int_0^inf s^n e^{-s} g(s) ds with smooth g.
fn tail_rule() -> &'static Laguerreish {
    static RULE: OnceLock<Laguerreish> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut s = Vec::new();
        let mut w3 = Vec::new();
        let mut w4 = Vec::new();
        let breaks = [0.0, 2.0, 5.0, 10.0, 18.0, 30.0, 48.0, 80.0];
        for win in breaks.windows(2) {
            for (x, w) in kronrod_rule(win[0], win[1]) {
                s.push(x);
                w3.push(w * x.powi(3) * (-x).exp());
                w4.push(w * x.powi(4) * (-x).exp());
            }
        }
        Laguerreish { s, w3, w4 }
    })
}

/// `e^{-V^2/2} int_0^inf r^n exp(-r^2/2 + z r) dr` for `n = 3, 4`, `|z| <= V`.
///
/// Closed form with error functions, except for strongly negative `z` where
/// the closed form cancels and a fixed quadrature in `s = |z| r` is used.
pub fn gauss_moments(z: f64, v: f64) -> (f64, f64) {
    let g = (-0.5 * v * v).exp();
    if z >= NEG_SPLIT {
        let e = (0.5 * (z * z - v * v)).min(0.0).exp() * libm::erfc(-z / std::f64::consts::SQRT_2);
        let z2 = z * z;
        let l3 = g * (2.0 + z2) + SQRT_PI_2 * (3.0 * z + z2 * z) * e;
        let l4 = SQRT_PI_2 * (3.0 + 6.0 * z2 + z2 * z2) * e + g * (5.0 * z + z2 * z);
        (l3, l4)
    } else if g == 0.0 {
        (0.0, 0.0)
    } else {
        let x = -z;
        let y = 0.5 / (x * x);
        let rule = tail_rule();
        let (mut a3, mut a4) = (0.0, 0.0);
        for i in 0..rule.s.len() {
            let w = (-y * rule.s[i] * rule.s[i]).exp();
            a3 += rule.w3[i] * w;
            a4 += rule.w4[i] * w;
        }
        (g * a3 / x.powi(4), g * a4 / x.powi(5))
    }
}

/// Gaussian pressure in d = 2 at speed `v`: `(p, dp/du)`.
fn gauss2d(eps: f64, phi: f64, v: f64, opts: QuadOptions) -> (f64, f64) {
    let q = integrate_vec_breaks(
        |tau| {
            let c = (tau + phi).cos();
            let s = (tau + phi).sin();
            let w = tau.cos().powi(2);
            let (l3, l4) = gauss_moments(eps * v * c, v);
            [w * l3, w * s * l4]
        },
        &[-FRAC_PI_2, -phi, FRAC_PI_2],
        opts,
    );
    let p = eps * q.value[0] / (2.0 * PI);
    let dp = -phi.cos().powi(2) * v * q.value[1] / (2.0 * PI);
    (p, dp)
}

/// Azimuthal integral `J(phi, zeta)` and `dJ/dphi` on the band
/// `|zeta| < sin(phi)`, written with `zeta = sin(phi) sin(psi)`.
fn j_band(phi: f64, psi: f64) -> (f64, f64, f64) {
    let (s, c) = phi.sin_cos();
    let (sp, cp) = psi.sin_cos();
    let zeta = s * sp;
    let w = 1.0 - zeta * zeta;
    let a = 2.0 * zeta * zeta * c * c + s * s * w;
    let t = s * cp;
    let arg = (-c * sp / (1.0 - s * s * sp * sp).sqrt()).clamp(-1.0, 1.0);
    let theta0 = arg.acos();
    let j = theta0 * a + 3.0 * zeta * c * t;
    let dj = 2.0 * s * c * (1.0 - 3.0 * zeta * zeta) * theta0 + 2.0 * sp * t * (1.0 - 3.0 * s * s);
    (zeta, j, dj)
}

fn j_full(phi: f64, zeta: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let a = 2.0 * zeta * zeta * c * c + s * s * (1.0 - zeta * zeta);
    (PI * a, 2.0 * PI * s * c * (1.0 - 3.0 * zeta * zeta))
}

/// Integrates `kernel(zeta) * (J, dJ/dphi)` over `zeta in [-1, 1]`.
fn j_integral<K: Fn(f64) -> f64>(phi: f64, kernel: K, opts: QuadOptions) -> (f64, f64) {
    let s = phi.sin();
    let band = integrate_vec(
        |psi| {
            let (zeta, j, dj) = j_band(phi, psi);
            let k = kernel(zeta) * s * psi.cos();
            [k * j, k * dj]
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        opts,
    );
    let full = integrate_vec(
        |zeta| {
            let (j, dj) = j_full(phi, zeta);
            let k = kernel(zeta);
            [k * j, k * dj]
        },
        s,
        1.0,
        opts,
    );
    (band.value[0] + full.value[0], band.value[1] + full.value[1])
}

/// Gaussian pressure in d = 3 at speed `v`: `(p, dp/du)`.
fn gauss3d(eps: f64, phi: f64, v: f64, opts: QuadOptions) -> (f64, f64) {
    let norm = (2.0 * PI).powf(-1.5);
    let (a, b) = j_integral(phi, |zeta| gauss_moments(eps * v * zeta, v).1, opts);
    (eps * norm * a, eps * norm * phi.cos().powi(2) * b)
}

// ---------------------------------------------------------------------------
// Generic kernel

/// The reduction `rho(z) = int_0^inf r^{d+1} sigma(sqrt(r^2 + 2 r V z + V^2)) dr`
/// on `|z| <= 1`, cached on a table for fast interpolation.
#[derive(Debug, Clone)]
pub struct VarrhoKernel {
    density: Arc<RadialDensity>,
    v: f64,
    opts: QuadOptions,
    z: Vec<f64>,
    val: Vec<f64>,
    der: Vec<f64>,
}

const KERNEL_NODES: usize = 2049;

impl VarrhoKernel {
    /// `v = 0` is allowed here (the limit of a body at rest).
    pub fn new(density: Arc<RadialDensity>, v: f64, opts: QuadOptions) -> Result<Self> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::Domain(format!("speed must be non-negative, got {v}")));
        }
        let mut k = VarrhoKernel { density, v, opts, z: Vec::new(), val: Vec::new(), der: Vec::new() };
        let n = KERNEL_NODES;
        for i in 0..n {
            let z = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let (a, b) = k.direct(z);
            k.z.push(z);
            k.val.push(a);
            k.der.push(b);
        }
        if k.val.iter().chain(k.der.iter()).any(|x| !x.is_finite()) {
            return Err(Error::numeric("kernel table is not finite", f64::NAN));
        }
        Ok(k)
    }

    fn direct(&self, z: f64) -> (f64, f64) {
        let d = self.density.dim() as i32;
        let v = self.v;
        let big_r = self.density.support_radius();
        let disc = big_r * big_r - v * v * (1.0 - z * z);
        if disc <= 0.0 {
            return (0.0, 0.0);
        }
        let sq = disc.sqrt();
        let lo = (-v * z - sq).max(0.0);
        let hi = -v * z + sq;
        if hi <= lo {
            return (0.0, 0.0);
        }
        let mid = -v * z;
        let mut breaks = vec![lo];
        if mid > lo && mid < hi {
            breaks.push(mid);
        }
        breaks.push(hi);
        let q = integrate_vec_breaks(
            |r| {
                let s = (r * r + 2.0 * r * v * z + v * v).max(0.0).sqrt();
                let (sig, ratio) = self.density.sigma_and_ratio(s);
                let rd = r.powi(d + 1);
                [rd * sig, rd * ratio * r * v]
            },
            &breaks,
            self.opts,
        );
        (q.value[0], q.value[1])
    }

    /// `(rho(z), rho'(z))` by direct quadrature.
    pub fn varrho(&self, z: f64) -> Result<(f64, f64)> {
        if !(z.abs() <= 1.0) {
            return Err(Error::Domain(format!("kernel argument must lie in [-1, 1], got {z}")));
        }
        Ok(self.direct(z))
    }

    /// `(rho(z), rho'(z))` from the cached table: cubic Hermite in `ln rho`
    /// where the table is positive, in `rho` itself otherwise.
    pub fn interp(&self, z: f64) -> (f64, f64) {
        let n = self.z.len();
        let h = 2.0 / (n - 1) as f64;
        let x = ((z.clamp(-1.0, 1.0) + 1.0) / h).min((n - 1) as f64);
        let i = (x.floor() as usize).min(n - 2);
        let t = x - i as f64;
        let (y0, y1) = (self.val[i], self.val[i + 1]);
        if y0 > 1e-290 && y1 > 1e-290 {
            let (l, dl) = hermite(t, h, y0.ln(), y1.ln(), self.der[i] / y0, self.der[i + 1] / y1);
            let v = l.exp();
            (v, v * dl)
        } else {
            hermite(t, h, y0, y1, self.der[i], self.der[i + 1])
        }
    }

    pub fn speed(&self) -> f64 {
        self.v
    }
}

fn hermite(t: f64, h: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> (f64, f64) {
    let (m0, m1) = (d0 * h, d1 * h);
    let t2 = t * t;
    let t3 = t2 * t;
    let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1;
    let dv = ((6.0 * t2 - 6.0 * t) * y0
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (-6.0 * t2 + 6.0 * t) * y1
        + (3.0 * t2 - 2.0 * t) * m1)
        / h;
    (v, dv)
}

fn generic2d(k: &VarrhoKernel, eps: f64, phi: f64, opts: QuadOptions) -> (f64, f64) {
    let q = integrate_vec_breaks(
        |th| {
            let (s, c) = (th + phi).sin_cos();
            let w = th.cos().powi(2);
            let (r, dr) = k.interp(-eps * c);
            [w * r, w * s * dr]
        },
        &[-FRAC_PI_2, -phi, FRAC_PI_2 - phi, FRAC_PI_2],
        opts,
    );
    (eps * q.value[0], phi.cos().powi(2) * q.value[1])
}

fn generic3d(k: &VarrhoKernel, eps: f64, phi: f64, opts: QuadOptions) -> (f64, f64) {
    let (a, b) = j_integral(phi, |zeta| k.interp(-eps * zeta).0, opts);
    (eps * a, eps * phi.cos().powi(2) * b)
}

/// Any `d >= 3`: sphere integral split into the last coordinate `zeta` and
/// the first coordinate of the remaining `S^{d-2}` direction, `w = cos(theta)`.
fn generic_nd(k: &VarrhoKernel, d: usize, eps: f64, phi: f64, opts: QuadOptions) -> (f64, f64) {
    let (sf, cf) = phi.sin_cos();
    let area = sphere_area(d - 2);
    let inner_pow = d as i32 - 3;
    // zeta = cos(alpha) absorbs the (1 - zeta^2)^{(d-3)/2} weight
    let outer = |alpha: f64| -> [f64; 2] {
        let (sz, zeta) = alpha.sin_cos();
        let a = sz * sf;
        let b = eps * zeta * cf;
        // a cos(theta) + b < 0  <=>  theta > theta_star
        let theta_star = if a > 0.0 {
            (-b / a).clamp(-1.0, 1.0).acos()
        } else if b < 0.0 {
            0.0
        } else {
            PI
        };
        let inner = integrate_vec(
            |th| {
                let (st, ct) = th.sin_cos();
                let x = (a * ct + b).min(0.0);
                let wgt = st.powi(inner_pow);
                [wgt * x * x, wgt * 2.0 * x * (sz * ct * cf - eps * zeta * sf)]
            },
            theta_star,
            PI,
            opts,
        );
        let rho = k.interp(zeta).0;
        let jac = sz.powi(d as i32 - 2);
        [jac * rho * inner.value[0], jac * rho * inner.value[1]]
    };
    let a1 = sf.clamp(-1.0, 1.0).acos();
    let a2 = (-sf).clamp(-1.0, 1.0).acos();
    let q = integrate_vec_breaks(outer, &[0.0, a1, FRAC_PI_2, a2, PI], opts);
    (eps * area * q.value[0], eps * area * cf * cf * q.value[1])
}

// ---------------------------------------------------------------------------
// Model

#[derive(Debug, Clone)]
enum ModelKind {
    /// `sum coef * p_gauss(u; scaled_v)`.
    Gaussian {
        leaves: Vec<(f64, f64)>,
    },
    Generic {
        kernel: VarrhoKernel,
    },
}

/// Evaluator of both pressure functions for one flow context.
#[derive(Debug, Clone)]
pub struct PressureModel {
    d: usize,
    v: f64,
    opts: QuadOptions,
    kind: ModelKind,
}

impl PressureModel {
    pub fn new(ctx: &FlowContext) -> Result<Self> {
        let d = ctx.dim();
        let opts = ctx.quad();
        let leaves = ctx.density.gaussian_leaves();
        let use_gauss = match ctx.backend {
            Backend::GenericQuadrature => false,
            Backend::GaussianClosedForm2D | Backend::GaussianClosedForm3D => {
                let want = if ctx.backend == Backend::GaussianClosedForm2D { 2 } else { 3 };
                if d != want || leaves.is_none() {
                    return Err(Error::Unsupported(format!(
                        "{:?} backend needs a Gaussian-type density in d = {want}",
                        ctx.backend
                    )));
                }
                true
            }
            Backend::Auto => leaves.is_some() && (d == 2 || d == 3),
        };
        let kind = if use_gauss {
            let leaves = leaves
                .expect("checked above")
                .into_iter()
                .map(|(coef, scale)| (coef * scale.powi(-(d as i32) - 2), scale * ctx.v))
                .collect();
            ModelKind::Gaussian { leaves }
        } else {
            ModelKind::Generic { kernel: VarrhoKernel::new(ctx.density.clone(), ctx.v, opts)? }
        };
        Ok(PressureModel { d, v: ctx.v, opts, kind })
    }

    pub fn backend(&self) -> Backend {
        match (&self.kind, self.d) {
            (ModelKind::Gaussian { .. }, 2) => Backend::GaussianClosedForm2D,
            (ModelKind::Gaussian { .. }, _) => Backend::GaussianClosedForm3D,
            _ => Backend::GenericQuadrature,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn speed(&self) -> f64 {
        self.v
    }

    /// `(p(tan phi), p'(tan phi))` for `phi` in `[0, pi/2]`.
    pub fn eval_phi(&self, side: Side, phi: f64) -> (f64, f64) {
        let eps = side.eps();
        match &self.kind {
            ModelKind::Gaussian { leaves } => leaves.iter().fold((0.0, 0.0), |acc, &(coef, v)| {
                let (p, dp) =
                    if self.d == 2 { gauss2d(eps, phi, v, self.opts) } else { gauss3d(eps, phi, v, self.opts) };
                (acc.0 + coef * p, acc.1 + coef * dp)
            }),
            ModelKind::Generic { kernel } => match self.d {
                2 => generic2d(kernel, eps, phi, self.opts),
                3 => generic3d(kernel, eps, phi, self.opts),
                d => generic_nd(kernel, d, eps, phi, self.opts),
            },
        }
    }

    /// Same as [`eval_phi`](Self::eval_phi) through the general-dimension
    /// route; only meaningful for the generic backend.
    pub fn eval_phi_sphere_route(&self, side: Side, phi: f64) -> Option<(f64, f64)> {
        match &self.kind {
            ModelKind::Generic { kernel } if self.d >= 3 => {
                Some(generic_nd(kernel, self.d, side.eps(), phi, self.opts))
            }
            _ => None,
        }
    }

    pub fn eval(&self, side: Side, u: f64) -> (f64, f64) {
        self.eval_phi(side, to_phi(u))
    }
}

pub(crate) fn to_phi(u: f64) -> f64 {
    if u == f64::INFINITY {
        FRAC_PI_2
    } else {
        u.atan()
    }
}

// ---------------------------------------------------------------------------
// Curves

/// A sampled point of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub u: f64,
    pub p: f64,
    pub dp: f64,
}

/// A decreasing function on `[0, inf)` with a finite limit, seen through
/// point evaluations. Pressure curves and analytic test curves implement it.
pub trait Curve: Send + Sync {
    /// `(p(u), p'(u))`; `u = +inf` must be accepted.
    fn eval(&self, u: f64) -> (f64, f64);

    fn tail(&self) -> f64 {
        self.eval(f64::INFINITY).0
    }

    fn samples(&self) -> Vec<CurveSample> {
        compact_grid(GRID_POINTS)
            .into_iter()
            .map(|u| {
                let (p, dp) = self.eval(u);
                CurveSample { u, p, dp }
            })
            .collect()
    }

    fn value(&self, u: f64) -> f64 {
        self.eval(u).0
    }

    fn derivative(&self, u: f64) -> f64 {
        self.eval(u).1
    }
}

pub const GRID_POINTS: usize = 2048;

/// `n` points `u = tan(phi)` with `phi` uniform on `[0, pi/2)`: uniform near
/// zero and increasingly sparse toward infinity.
pub fn compact_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| (FRAC_PI_2 * k as f64 / n as f64).tan()).collect()
}

/// One side's pressure function with its samples cached.
#[derive(Debug, Clone)]
pub struct PressureCurve {
    model: Arc<PressureModel>,
    side: Side,
    tail: f64,
    samples: Vec<CurveSample>,
}

impl PressureCurve {
    pub fn new(ctx: &FlowContext, side: Side) -> Result<Self> {
        Self::from_model(Arc::new(PressureModel::new(ctx)?), side)
    }

    pub fn from_model(model: Arc<PressureModel>, side: Side) -> Result<Self> {
        let tail = model.eval_phi(side, FRAC_PI_2).0;
        let samples: Vec<CurveSample> = (0..GRID_POINTS)
            .map(|k| {
                let phi = FRAC_PI_2 * k as f64 / GRID_POINTS as f64;
                let (p, dp) = model.eval_phi(side, phi);
                CurveSample { u: phi.tan(), p, dp }
            })
            .collect();
        if !tail.is_finite() || samples.iter().any(|s| !s.p.is_finite() || !s.dp.is_finite()) {
            return Err(Error::numeric("pressure evaluation is not finite", f64::NAN));
        }
        Ok(PressureCurve { model, side, tail, samples })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn model(&self) -> &Arc<PressureModel> {
        &self.model
    }

    pub fn cached_samples(&self) -> &[CurveSample] {
        &self.samples
    }
}

impl Curve for PressureCurve {
    fn eval(&self, u: f64) -> (f64, f64) {
        self.model.eval(self.side, u)
    }

    fn tail(&self) -> f64 {
        self.tail
    }

    fn samples(&self) -> Vec<CurveSample> {
        self.samples.clone()
    }
}

/// `p(u)` for one side. Negative `u` is a domain error.
pub fn pressure(ctx: &FlowContext, side: Side, u: f64) -> Result<f64> {
    Ok(pressure_pair(ctx, side, u)?.0)
}

/// `p'(u)` for one side, from the differentiated kernel.
pub fn pressure_derivative(ctx: &FlowContext, side: Side, u: f64) -> Result<f64> {
    Ok(pressure_pair(ctx, side, u)?.1)
}

fn pressure_pair(ctx: &FlowContext, side: Side, u: f64) -> Result<(f64, f64)> {
    if !(u >= 0.0) {
        return Err(Error::Domain(format!("slope u must be non-negative, got {u}")));
    }
    Ok(PressureModel::new(ctx)?.eval(side, u))
}

/// `lim_{u -> inf} p(u)`.
pub fn pressure_tail(ctx: &FlowContext, side: Side) -> Result<f64> {
    Ok(PressureModel::new(ctx)?.eval_phi(side, FRAC_PI_2).0)
}

/// Points where `p''` changes sign, located from sign changes of the slope
/// of the analytic derivative on the sample grid and refined by bisection.
pub fn inflection_points(curve: &dyn Curve) -> Vec<f64> {
    let s = curve.samples();
    let sec = |u: f64| {
        let h = 1e-5 * (1.0 + u);
        (curve.derivative(u + h) - curve.derivative((u - h).max(0.0))) / (u + h - (u - h).max(0.0))
    };
    let mut out = Vec::new();
    let cut = s.len() * 15 / 16;
    for w in s[1..cut].windows(2) {
        let (a, b) = (w[0].u, w[1].u);
        let (fa, fb) = (sec(a), sec(b));
        if fa.signum() != fb.signum() {
            let r = crate::roots::brent(sec, a, b, 1e-12, 0.0, 100).map(|r| r.x).unwrap_or(0.5 * (a + b));
            out.push(r);
        }
    }
    out
}
