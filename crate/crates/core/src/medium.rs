//! Radial velocity densities of the medium.
//!
//! A density is a function `sigma(|v|)` on `R^d`; the medium seen from the body
//! moving with speed `V` has velocity density `sigma(|v + V e_d|)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// What to do when a density fails the admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationPolicy {
    #[default]
    Reject,
    Warn,
}

/// Serializable description of a density, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub d: usize,
    #[serde(flatten)]
    pub kind: KindSpec,
    #[serde(default)]
    pub on_violation: ViolationPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KindSpec {
    Gaussian,
    Maxwell {
        mass: f64,
        temperature: f64,
        density: f64,
        #[serde(default = "unit")]
        boltzmann: f64,
    },
    Mixture {
        components: Vec<ComponentSpec>,
    },
    Tabulated {
        r: Vec<f64>,
        sigma: Vec<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

/// One term `weight * base(scale * r)` of a mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub weight: f64,
    pub scale: f64,
    pub base: KindSpec,
}

#[derive(Debug, Clone)]
pub enum DensityKind {
    /// Standard normal in `R^d`.
    Gaussian,
    /// Normal with variance `theta = k T / m`, scaled to number density `nu0`.
    Maxwell {
        theta: f64,
        nu0: f64,
        spec: (f64, f64, f64, f64),
    },
    Mixture(Vec<Component>),
    Tabulated(Tabulated),
}

#[derive(Debug, Clone)]
pub struct Component {
    pub weight: f64,
    pub scale: f64,
    pub base: DensityKind,
}

/// Monotone cubic (Fritsch-Carlson) interpolant of tabulated values, zero
/// beyond the last node. The slope at `r = 0` is pinned to zero.
#[derive(Debug, Clone)]
pub struct Tabulated {
    r: Vec<f64>,
    sigma: Vec<f64>,
    slope: Vec<f64>,
}

impl Tabulated {
    pub fn new(r: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if r.len() != sigma.len() {
            return Err(Error::Input("tabulated density: r and sigma lengths differ".into()));
        }
        if r.len() < 3 {
            return Err(Error::Input("tabulated density needs at least 3 nodes".into()));
        }
        if r.iter().chain(sigma.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Input("tabulated density has non-finite entries".into()));
        }
        if r[0] != 0.0 {
            return Err(Error::Input("tabulated density must start at r = 0".into()));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("tabulated radii must be strictly increasing".into()));
        }
        let slope = pchip_slopes(&r, &sigma);
        Ok(Tabulated { r, sigma, slope })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.r, &self.sigma)
    }

    /// Interpolated `sigma(x)`.
    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    fn locate(&self, x: f64) -> usize {
        match self.r.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(self.r.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.r.len() - 2),
        }
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.r.len();
        if x > self.r[n - 1] || x < 0.0 {
            return (0.0, 0.0);
        }
        let i = self.locate(x);
        let h = self.r[i + 1] - self.r[i];
        let t = (x - self.r[i]) / h;
        let (y0, y1, m0, m1) = (self.sigma[i], self.sigma[i + 1], self.slope[i], self.slope[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * h * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0 + (-6.0 * t2 + 6.0 * t) * y1) / h
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (3.0 * t2 - 2.0 * t) * m1;
        (v, dv)
    }

    pub fn support(&self) -> f64 {
        self.r[self.r.len() - 1]
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    // one-sided three-point end slope, limited to keep monotonicity
    let (h0, h1, d0, d1) = (h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    let mut end = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if end.signum() != d0.signum() {
        end = 0.0;
    } else if d0.signum() != d1.signum() && end.abs() > 3.0 * d0.abs() {
        end = 3.0 * d0;
    }
    m[n - 1] = end;
    m[0] = 0.0;
    m
}

impl DensityKind {
    fn from_spec(spec: &KindSpec) -> Result<Self> {
        Ok(match spec {
            KindSpec::Gaussian => DensityKind::Gaussian,
            KindSpec::Maxwell { mass, temperature, density, boltzmann } => {
                for (name, v) in
                    [("mass", mass), ("temperature", temperature), ("density", density), ("boltzmann", boltzmann)]
                {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(Error::Input(format!("maxwell {name} must be positive")));
                    }
                }
                DensityKind::Maxwell {
                    theta: boltzmann * temperature / mass,
                    nu0: *density,
                    spec: (*mass, *temperature, *density, *boltzmann),
                }
            }
            KindSpec::Mixture { components } => {
                if components.is_empty() {
                    return Err(Error::Input("mixture has no components".into()));
                }
                let mut out = Vec::with_capacity(components.len());
                for c in components {
                    if !(c.weight.is_finite() && c.weight > 0.0 && c.scale.is_finite() && c.scale > 0.0) {
                        return Err(Error::Input("mixture weights and scales must be positive".into()));
                    }
                    out.push(Component { weight: c.weight, scale: c.scale, base: DensityKind::from_spec(&c.base)? });
                }
                DensityKind::Mixture(out)
            }
            KindSpec::Tabulated { r, sigma } => DensityKind::Tabulated(Tabulated::new(r.clone(), sigma.clone())?),
        })
    }

    fn to_spec(&self) -> KindSpec {
        match self {
            DensityKind::Gaussian => KindSpec::Gaussian,
            DensityKind::Maxwell { spec, .. } => {
                KindSpec::Maxwell { mass: spec.0, temperature: spec.1, density: spec.2, boltzmann: spec.3 }
            }
            DensityKind::Mixture(cs) => KindSpec::Mixture {
                components: cs
                    .iter()
                    .map(|c| ComponentSpec { weight: c.weight, scale: c.scale, base: c.base.to_spec() })
                    .collect(),
            },
            DensityKind::Tabulated(t) => KindSpec::Tabulated { r: t.r.clone(), sigma: t.sigma.clone() },
        }
    }

    /// `(sigma(r), sigma'(r) / r)`.
    fn eval(&self, d: usize, r: f64) -> (f64, f64) {
        match self {
            DensityKind::Gaussian => {
                let s = (2.0 * PI).powf(-0.5 * d as f64) * (-0.5 * r * r).exp();
                (s, -s)
            }
            DensityKind::Maxwell { theta, nu0, .. } => {
                let s = nu0 * (2.0 * PI * theta).powf(-0.5 * d as f64) * (-0.5 * r * r / theta).exp();
                (s, -s / theta)
            }
            DensityKind::Mixture(cs) => cs.iter().fold((0.0, 0.0), |acc, c| {
                let (s, g) = c.base.eval(d, c.scale * r);
                (acc.0 + c.weight * s, acc.1 + c.weight * c.scale * c.scale * g)
            }),
            DensityKind::Tabulated(t) => {
                let (s, ds) = t.eval(r);
                let g = if r > 1e-12 {
                    ds / r
                } else {
                    // sigma'(0) = 0, so the ratio tends to sigma''(0)
                    let (_, ds1) = t.eval(1e-6);
                    ds1 / 1e-6
                };
                (s, g)
            }
        }
    }

    fn support(&self) -> f64 {
        match self {
            DensityKind::Gaussian => 14.0,
            DensityKind::Maxwell { theta, .. } => 14.0 * theta.sqrt(),
            DensityKind::Mixture(cs) => cs.iter().map(|c| c.base.support() / c.scale).fold(0.0, f64::max),
            DensityKind::Tabulated(t) => t.support(),
        }
    }

    fn gaussian_leaves(&self, d: usize, out: &mut Vec<(f64, f64)>, coef: f64, scale: f64) -> bool {
        match self {
            DensityKind::Gaussian => {
                out.push((coef, scale));
                true
            }
            DensityKind::Maxwell { theta, nu0, .. } => {
                let s = theta.sqrt();
                out.push((coef * nu0 * s.powi(-(d as i32)), scale / s));
                true
            }
            DensityKind::Mixture(cs) => {
                cs.iter().all(|c| c.base.gaussian_leaves(d, out, coef * c.weight, scale * c.scale))
            }
            DensityKind::Tabulated(_) => false,
        }
    }
}

/// A radial density `sigma` on `R^d`.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    d: usize,
    kind: DensityKind,
}

impl RadialDensity {
    pub fn new(d: usize, kind: DensityKind) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {d}")));
        }
        Ok(RadialDensity { d, kind })
    }

    pub fn gaussian(d: usize) -> Result<Self> {
        Self::new(d, DensityKind::Gaussian)
    }

    /// Builds a density from its file description, running the admissibility
    /// check on tabulated input according to the DensitySpec violation policy.
    pub fn from_spec(spec: &DensitySpec) -> Result<Self> {
        let dens = Self::new(spec.d, DensityKind::from_spec(&spec.kind)?)?;
        if dens.contains_tabulated() {
            let report = validate_condition_a(&dens, None, 1e-9)?;
            if !report.admissible {
                let msg = report.violations.join("; ");
                match spec.on_violation {
                    ViolationPolicy::Reject => return Err(Error::Input(format!("density is not admissible: {msg}"))),
                    ViolationPolicy::Warn => eprintln!("warning: density may not be admissible: {msg}"),
                }
            }
        }
        Ok(dens)
    }

    pub fn to_spec(&self) -> DensitySpec {
        DensitySpec { d: self.d, kind: self.kind.to_spec(), on_violation: ViolationPolicy::Reject }
    }

    /// Two-column CSV `r,sigma` with an optional header line.
    pub fn from_csv(d: usize, text: &str, policy: ViolationPolicy) -> Result<Self> {
        let mut r = Vec::new();
        let mut s = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Input(format!("line {}: expected two columns", lineno + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(a), Ok(b)) => {
                    r.push(a);
                    s.push(b);
                }
                _ if r.is_empty() => continue, // header
                _ => return Err(Error::Input(format!("line {}: not a number", lineno + 1))),
            }
        }
        let spec = DensitySpec { d, kind: KindSpec::Tabulated { r, sigma: s }, on_violation: policy };
        Self::from_spec(&spec)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn sigma(&self, r: f64) -> f64 {
        self.kind.eval(self.d, r).0
    }

    /// `(sigma(r), sigma'(r) / r)`.
    pub fn sigma_and_ratio(&self, r: f64) -> (f64, f64) {
        self.kind.eval(self.d, r)
    }

    /// Radius beyond which `sigma` is negligible (or exactly zero).
    pub fn support_radius(&self) -> f64 {
        self.kind.support()
    }

    fn contains_tabulated(&self) -> bool {
        fn walk(k: &DensityKind) -> bool {
            match k {
                DensityKind::Tabulated(_) => true,
                DensityKind::Mixture(cs) => cs.iter().any(|c| walk(&c.base)),
                _ => false,
            }
        }
        walk(&self.kind)
    }

    /// Writes `sigma` as `sum coef * gaussian(scale * r)` when possible.
    pub fn gaussian_leaves(&self) -> Option<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        self.kind.gaussian_leaves(self.d, &mut out, 1.0, 1.0).then_some(out)
    }
}

/// Surface area of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// Volume of the unit ball in `R^k`.
pub fn ball_volume(k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    sphere_area(k) / k as f64
}

/// `int_0^inf sigma(r) r^k dr`.
pub fn moment(density: &RadialDensity, k: u32) -> Result<f64> {
    fn go(kind: &DensityKind, d: usize, k: u32) -> Result<f64> {
        match kind {
            DensityKind::Mixture(cs) => {
                let mut total = 0.0;
                for c in cs {
                    total += c.weight * c.scale.powi(-(k as i32) - 1) * go(&c.base, d, k)?;
                }
                Ok(total)
            }
            DensityKind::Tabulated(t) => {
                let opts = QuadOptions::default();
                let mut total = 0.0;
                for w in t.r.windows(2) {
                    total += integrate(|r| t.eval(r).0 * r.powi(k as i32), w[0], w[1], opts).value[0];
                }
                Ok(total)
            }
            _ => {
                let f = |r: f64| kind.eval(d, r).0 * r.powi(k as i32);
                let opts = QuadOptions::default();
                let mut total = integrate(f, 0.0, 1.0, opts).value[0];
                let mut r = 1.0;
                while r < 1e9 {
                    total += integrate(f, r, 2.0 * r, opts).value[0];
                    r *= 2.0;
                    let edge = kind.eval(d, r).0 * r.powi(k as i32 + 2);
                    if edge < 1e-14 * total.abs() {
                        return Ok(total);
                    }
                }
                Err(Error::numeric("moment integral does not converge", total))
            }
        }
    }
    let m = go(&density.kind, density.d, k)?;
    if !m.is_finite() {
        return Err(Error::numeric("moment is not finite", m));
    }
    Ok(m)
}

/// Number density `nu = |S^{d-1}| * int sigma r^{d-1} dr`.
pub fn flux_density(density: &RadialDensity) -> Result<f64> {
    Ok(sphere_area(density.d) * moment(density, density.d as u32 - 1)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub violations: Vec<String>,
    /// `r^{d+2} sigma(r)` at the last grid point over the accumulated moment.
    pub tail_ratio: f64,
}

/// Default check grid: 512 log-spaced points on `[1e-4, 40]`.
pub fn default_check_grid() -> Vec<f64> {
    let n = 512;
    let (a, b) = (1e-4f64.ln(), 40f64.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Checks on a grid that `sigma >= 0`, that `sigma'(r)/r` is negative, bounded
/// and non-decreasing, and that `int sigma r^{d+1}` has a decaying tail.
pub fn validate_condition_a(density: &RadialDensity, grid: Option<&[f64]>, tol: f64) -> Result<AdmissibilityReport> {
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = default_check_grid();
            &owned
        }
    };
    if grid.is_empty() {
        return Err(Error::Input("empty check grid".into()));
    }
    let vals: Vec<(f64, f64)> = grid.iter().map(|&r| density.sigma_and_ratio(r)).collect();
    if vals.iter().any(|(s, g)| !s.is_finite() || !g.is_finite()) {
        return Err(Error::Input("density is not finite on the check grid".into()));
    }
    let d = density.d as i32;
    let mut violations = Vec::new();
    let smax = vals.iter().map(|v| v.0.abs()).fold(0.0, f64::max);
    let gmax = vals.iter().map(|v| v.1.abs()).fold(0.0, f64::max);
    if let Some(i) = vals.iter().position(|v| v.0 < -tol * smax) {
        violations.push(format!("sigma is negative at r = {}", grid[i]));
    }
    if gmax == 0.0 {
        violations.push("sigma'(r)/r vanishes identically".into());
    } else {
        if let Some(i) = vals.iter().position(|v| v.1 > tol * gmax) {
            violations.push(format!("sigma'(r)/r is not negative at r = {}", grid[i]));
        }
        if let Some(i) = (1..vals.len()).find(|&i| vals[i].1 < vals[i - 1].1 - tol * gmax) {
            violations.push(format!("sigma'(r)/r decreases at r = {}", grid[i]));
        }
    }
    let mut running = 0.0;
    for i in 1..grid.len() {
        let f0 = vals[i - 1].0 * grid[i - 1].powi(d + 1);
        let f1 = vals[i].0 * grid[i].powi(d + 1);
        running += 0.5 * (f0 + f1) * (grid[i] - grid[i - 1]);
    }
    let last = grid.len() - 1;
    let edge = vals[last].0 * grid[last].powi(d + 2);
    let tail_ratio = if running > 0.0 { edge / running } else { f64::INFINITY };
    if !(tail_ratio <= 1e-6) {
        violations.push(format!("moment tail does not decay (ratio {tail_ratio:e})"));
    }
    Ok(AdmissibilityReport { admissible: violations.is_empty(), violations, tail_ratio })
}
