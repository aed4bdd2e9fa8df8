//! Bracketing root finders.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Brent's method on a sign-changing bracket `[a, b]`.
///
/// Stops when the bracket is narrower than `xtol` (absolute, plus a few ulps)
/// or when `|f| <= ftol`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64, ftol: f64, max_iter: usize) -> Result<Root> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(Root { x: a, residual: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, residual: 0.0, iterations: 0 });
    }
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::numeric("non-finite function value at bracket end", f64::NAN));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::numeric(format!("no sign change on [{a}, {b}]"), fa.abs().min(fb.abs())));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for it in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb.abs() <= ftol {
            return Ok(Root { x: b, residual: fb.abs(), iterations: it });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::numeric("non-finite function value", f64::NAN));
        }
    }
    Err(Error::numeric("root finder hit the iteration cap", fb.abs()))
}

/// Largest `x` in `[lo, hi]` with `pred(x)` true, for a predicate that is
/// true on an initial segment. Returns `lo` when `pred(lo)` is false.
pub fn last_true<F: FnMut(f64) -> bool>(mut pred: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> f64 {
    if pred(hi) {
        return hi;
    }
    for _ in 0..max_iter {
        if hi - lo <= xtol.max(4.0 * f64::EPSILON * hi.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_cubic() {
        let r = brent(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15, 0.0, 200).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn brent_requires_bracket() {
        assert!(brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0, 100).is_err());
    }

    #[test]
    fn last_true_finds_threshold() {
        let x = last_true(|x| x <= 0.3, 0.0, 1.0, 1e-14, 200);
        assert!((x - 0.3).abs() < 1e-13);
    }
}
