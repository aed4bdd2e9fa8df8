//! Monte Carlo estimate of the resistance of a given body, independent of the
//! pressure kernels: sample a surface point and a particle velocity and
//! average the momentum transfer `(v | n)_-^2` along the axis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::{sphere_area, DensityKind, RadialDensity, Tabulated};
use crate::pressure::FlowContext;
use crate::profile::BodyProfile;

pub const MIN_SAMPLES: u64 = 1000;
const CHUNK: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    /// Estimate of `R_+(f_+) + R_-(f_-)`.
    pub mean: f64,
    pub se: f64,
    /// Number of velocity samples (antithetic partners included).
    pub n: u64,
    pub seed: u64,
}

// inverse CDF of r^{d-1} sigma(r) on a fine piecewise-linear table
#[derive(Debug, Clone)]
struct RadialTable {
    r: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialTable {
    fn new(t: &Tabulated, d: usize) -> Self {
        let (nodes, _) = t.nodes();
        let f = |r: f64| t.value(r).max(0.0) * r.powi(d as i32 - 1);
        let mut r = vec![0.0];
        let mut cdf = vec![0.0];
        for w in nodes.windows(2) {
            let sub = 64;
            let h = (w[1] - w[0]) / sub as f64;
            for k in 0..sub {
                let a = w[0] + k as f64 * h;
                let mass = h / 6.0 * (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h));
                r.push(a + h);
                cdf.push(cdf[cdf.len() - 1] + mass);
            }
        }
        RadialTable { r, cdf }
    }

    fn mass(&self) -> f64 {
        self.cdf[self.cdf.len() - 1]
    }

    fn sample(&self, x: f64) -> f64 {
        let target = x * self.mass();
        let k = self.cdf.partition_point(|&c| c < target).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let s = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
        self.r[k - 1] + s * (self.r[k] - self.r[k - 1])
    }
}

#[derive(Debug, Clone)]
enum Leaf {
    Gaussian,
    Radial(RadialTable),
}

/// Draws velocities `w` from `sigma / nu`; the density is flattened into
/// leaves `mass * base(scale * r)`.
#[derive(Debug, Clone)]
struct VelocitySampler {
    d: usize,
    cum_mass: Vec<f64>,
    leaves: Vec<(f64, Leaf)>,
}

impl VelocitySampler {
    fn new(density: &RadialDensity) -> Result<Self> {
        let d = density.dim();
        let mut out = Vec::new();
        fn walk(kind: &DensityKind, d: usize, coef: f64, scale: f64, out: &mut Vec<(f64, f64, Leaf)>) {
            let di = d as i32;
            match kind {
                DensityKind::Gaussian => out.push((coef * scale.powi(-di), scale, Leaf::Gaussian)),
                DensityKind::Maxwell { theta, nu0, .. } => {
                    let s = theta.sqrt();
                    let (c, b) = (coef * nu0 * s.powi(-di), scale / s);
                    out.push((c * b.powi(-di), b, Leaf::Gaussian));
                }
                DensityKind::Mixture(cs) => {
                    for c in cs {
                        walk(&c.base, d, coef * c.weight, scale * c.scale, out);
                    }
                }
                DensityKind::Tabulated(t) => {
                    let table = RadialTable::new(t, d);
                    let mass = coef * scale.powi(-di) * sphere_area(d) * table.mass();
                    out.push((mass, scale, Leaf::Radial(table)));
                }
            }
        }
        walk(density.kind(), d, 1.0, 1.0, &mut out);
        if out.iter().any(|(m, _, _)| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Input("density has negative or non-finite mass".into()));
        }
        let mut cum_mass = Vec::with_capacity(out.len());
        let mut acc = 0.0;
        for (m, _, _) in &out {
            acc += m;
            cum_mass.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::Input("density has zero mass".into()));
        }
        Ok(VelocitySampler { d, cum_mass, leaves: out.into_iter().map(|(_, s, l)| (s, l)).collect() })
    }

    fn nu(&self) -> f64 {
        self.cum_mass[self.cum_mass.len() - 1]
    }

    /// First and last components of one draw.
    fn draw<R: Rng>(&self, rng: &mut R, buf: &mut [f64]) -> (f64, f64) {
        let k = if self.leaves.len() == 1 {
            0
        } else {
            let x = rng.gen::<f64>() * self.nu();
            self.cum_mass.partition_point(|&c| c <= x).min(self.leaves.len() - 1)
        };
        let (scale, leaf) = &self.leaves[k];
        let d = self.d;
        match leaf {
            Leaf::Gaussian => {
                let w1: f64 = rng.sample(StandardNormal);
                let wd: f64 = rng.sample(StandardNormal);
                (w1 / scale, wd / scale)
            }
            Leaf::Radial(t) => {
                let r = t.sample(rng.gen::<f64>()) / scale;
                let mut norm = 0.0;
                for x in buf.iter_mut().take(d) {
                    *x = rng.sample(StandardNormal);
                    norm += *x * *x;
                }
                let norm = norm.sqrt();
                (r * buf[0] / norm, r * buf[d - 1] / norm)
            }
        }
    }
}

fn neg_sq(x: f64) -> f64 {
    if x < 0.0 {
        x * x
    } else {
        0.0
    }
}

/// Estimates `R_+(f_+) + R_-(f_-)` for `body` in the flow `ctx` from
/// `n_samples` velocity draws (in antithetic pairs). Deterministic in `seed`.
pub fn estimate_resistance(body: &BodyProfile, ctx: &FlowContext, n_samples: u64, seed: u64) -> Result<McEstimate> {
    if n_samples < MIN_SAMPLES {
        return Err(Error::Input(format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    body.validate()?;
    let d = ctx.dim();
    if body.d != d {
        return Err(Error::Input(format!("profile has d = {}, flow has d = {d}", body.d)));
    }
    let sampler = VelocitySampler::new(&ctx.density)?;
    let nu = sampler.nu();
    let v = ctx.v;
    let pairs = n_samples.div_ceil(2);
    let chunks = pairs.div_ceil(CHUNK);
    let exponent = 1.0 / (d as f64 - 1.0);
    let (fp, fm) = (&body.f_plus, &body.f_minus);

    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(pairs - c * CHUNK);
            let mut buf = vec![0.0; d];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let t = rng.gen::<f64>().powf(exponent);
                let (up, um) = (fp.slope_at(t), fm.slope_at(t));
                let (w1, wd) = sampler.draw(&mut rng, &mut buf);
                let vd = wd - v;
                let x = |v1: f64| neg_sq(v1 * up + vd) / (1.0 + up * up) - neg_sq(v1 * um - vd) / (1.0 + um * um);
                let y = 0.5 * nu * (x(w1) + x(-w1));
                s1 += y;
                s2 += y * y;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let m = pairs as f64;
    let mean = s1 / m;
    let var = ((s2 - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(McEstimate { mean, se: (var / m).sqrt(), n: 2 * pairs, seed })
}
