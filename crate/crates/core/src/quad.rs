//! Adaptive Gauss-Kronrod (10/21) quadrature for small vectors of integrands.
//!
//! Intervals are bisected worst-first until every component satisfies
//! `err <= rel * integral(|f|)`, which copes with integrands whose signed
//! integral is zero by symmetry.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077715191766150,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Three-point Gauss-Legendre nodes and weights on [-1, 1].
pub const GL3: [(f64, f64); 3] = [
    (-0.774596669241483377035853079956480, 0.555555555555555555555555555555556),
    (0.0, 0.888888888888888888888888888888889),
    (0.774596669241483377035853079956480, 0.555555555555555555555555555555556),
];

#[derive(Debug, Clone, Copy)]
pub struct Quad<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub converged: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel: 1e-12, max_intervals: 400 }
    }
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    abs: [f64; N],
    error: [f64; N],
    // priority: worst error relative to the tolerance of its component
    key: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn gk21<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> ([f64; N], [f64; N], [f64; N]) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    let mut abs = [0.0; N];
    let fc = f(c);
    for i in 0..N {
        k[i] = WGK[10] * fc[i];
        abs[i] = WGK[10] * fc[i].abs();
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        for i in 0..N {
            k[i] += WGK[j] * (f1[i] + f2[i]);
            abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                g[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
    }
    let mut err = [0.0; N];
    for i in 0..N {
        k[i] *= h;
        g[i] *= h;
        abs[i] *= h.abs();
        err[i] = (k[i] - g[i]).abs();
    }
    (k, abs, err)
}

/// Integrates a vector-valued `f` over `[a, b]`.
pub fn integrate_vec<const N: usize, F>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Quad<N>
where
    F: FnMut(f64) -> [f64; N],
{
    if a == b {
        return Quad { value: [0.0; N], error: [0.0; N], converged: true, evaluations: 0 };
    }
    let mut heap: BinaryHeap<Panel<N>> = BinaryHeap::new();
    let mut evaluations = 21;
    let (v, s, e) = gk21(&mut f, a, b);
    let mut total = v;
    let mut total_abs = s;
    let mut total_err = e;
    let key = |e: &[f64; N], s: &[f64; N]| {
        let mut worst = 0.0f64;
        for i in 0..N {
            worst = worst.max(e[i] / (s[i] + f64::MIN_POSITIVE));
        }
        worst
    };
    heap.push(Panel { a, b, value: v, abs: s, error: e, key: key(&e, &s) });
    let done = |err: &[f64; N], abs: &[f64; N]| (0..N).all(|i| err[i] <= opts.rel * abs[i] || err[i] == 0.0);
    let mut converged = done(&total_err, &total_abs);
    while !converged && heap.len() < opts.max_intervals {
        let p = heap.pop().expect("heap is non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a.min(p.b) || m >= p.a.max(p.b) {
            heap.push(p);
            break;
        }
        let (v1, s1, e1) = gk21(&mut f, p.a, m);
        let (v2, s2, e2) = gk21(&mut f, m, p.b);
        evaluations += 42;
        for i in 0..N {
            total[i] += v1[i] + v2[i] - p.value[i];
            total_abs[i] += s1[i] + s2[i] - p.abs[i];
            total_err[i] += e1[i] + e2[i] - p.error[i];
        }
        heap.push(Panel { a: p.a, b: m, value: v1, abs: s1, error: e1, key: key(&e1, &s1) });
        heap.push(Panel { a: m, b: p.b, value: v2, abs: s2, error: e2, key: key(&e2, &s2) });
        converged = done(&total_err, &total_abs);
    }
    // Re-sum from the panels so round-off from the running updates does not accumulate.
    let mut panels: Vec<Panel<N>> = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for p in &panels {
        for i in 0..N {
            value[i] += p.value[i];
            error[i] += p.error[i];
        }
    }
    Quad { value, error, converged, evaluations }
}

/// Nodes and weights of the 21-point Kronrod rule on `[a, b]`.
pub fn kronrod_rule(a: f64, b: f64) -> Vec<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = vec![(c, h * WGK[10])];
    for j in 0..10 {
        out.push((c - h * XGK[j], h * WGK[j]));
        out.push((c + h * XGK[j], h * WGK[j]));
    }
    out
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Quad<1> {
    integrate_vec(|x| [f(x)], a, b, opts)
}

/// Integrates over consecutive break points, summing the pieces.
pub fn integrate_vec_breaks<const N: usize, F>(mut f: F, breaks: &[f64], opts: QuadOptions) -> Quad<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let mut out = Quad { value: [0.0; N], error: [0.0; N], converged: true, evaluations: 0 };
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let q = integrate_vec(&mut f, w[0], w[1], opts);
        for i in 0..N {
            out.value[i] += q.value[i];
            out.error[i] += q.error[i];
        }
        out.converged &= q.converged;
        out.evaluations += q.evaluations;
    }
    out
}
