//! Body profiles: a pair of convex, non-decreasing, non-positive functions
//! `f_+` (front) and `f_-` (rear) on `[0, 1]` with `f_+(0) + f_-(0) = -h`.
//! The body is `{ f_+(|x'|) <= x_d <= -f_-(|x'|) }` up to a vertical shift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pressure::Curve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    Trapezium,
    IsoscelesTriangle,
    TriangleTrapezium,
    TwoTriangles,
    TwoTrianglesTrapezium,
    /// d >= 3, flat rear.
    First,
    /// d >= 3, both sides curved.
    Second,
}

impl SolutionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolutionKind::Trapezium => "trapezium",
            SolutionKind::IsoscelesTriangle => "isosceles_triangle",
            SolutionKind::TriangleTrapezium => "triangle_trapezium",
            SolutionKind::TwoTriangles => "two_triangles",
            SolutionKind::TwoTrianglesTrapezium => "two_triangles_trapezium",
            SolutionKind::First => "first",
            SolutionKind::Second => "second",
        }
    }
}

/// A profile node. `u` is the slope to the right of the node when it is
/// known exactly; `parametric` marks nodes on a curved arc (the segment
/// ending at this node is a chord of that arc).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub parametric: bool,
}

impl ProfilePoint {
    pub fn new(t: f64, y: f64) -> Self {
        ProfilePoint { t, y, u: None, parametric: false }
    }
}

/// One side `f` on `[0, 1]`, stored as a polyline through exact points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SideProfile {
    pub points: Vec<ProfilePoint>,
}

impl SideProfile {
    /// `f == 0`.
    pub fn flat() -> Self {
        SideProfile { points: vec![ProfilePoint::new(0.0, 0.0), ProfilePoint::new(1.0, 0.0)] }
    }

    /// Two affine pieces: slope `lo` on `[0, t0]`, slope `hi` on `[t0, 1]`,
    /// height `h` (`f(0) = -h`, `f(1) = 0`).
    pub fn two_slopes(h: f64, lo: f64, hi: f64) -> Self {
        if h == 0.0 {
            return Self::flat();
        }
        if hi <= lo {
            return SideProfile { points: vec![ProfilePoint::new(0.0, -h), ProfilePoint::new(1.0, 0.0)] };
        }
        let t0 = ((hi - h) / (hi - lo)).clamp(0.0, 1.0);
        let mut points = vec![ProfilePoint { t: 0.0, y: -h, u: Some(lo), parametric: false }];
        if t0 > 0.0 && t0 < 1.0 {
            points.push(ProfilePoint { t: t0, y: -h + lo * t0, u: Some(hi), parametric: false });
        } else if t0 == 0.0 {
            points[0].u = Some(hi);
        }
        points.push(ProfilePoint::new(1.0, 0.0));
        SideProfile { points }
    }

    pub fn height(&self) -> f64 {
        -self.points[0].y
    }

    /// Slope of the segment containing `t`.
    pub fn slope_at(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|p| p.t <= t).clamp(1, self.points.len() - 1);
        let (a, b) = (self.points[k - 1], self.points[k]);
        (b.y - a.y) / (b.t - a.t)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|p| p.t <= t).clamp(1, self.points.len() - 1);
        let (a, b) = (self.points[k - 1], self.points[k]);
        a.y + (b.y - a.y) * (t - a.t) / (b.t - a.t)
    }

    /// Segments as `(t0, t1, slope)`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.points.windows(2).map(|w| (w[0].t, w[1].t, (w[1].y - w[0].y) / (w[1].t - w[0].t)))
    }

    /// `int_0^1 p(f'(t)) d(t^{d-1})` for the polyline.
    pub fn resistance(&self, p: &dyn Curve, d: usize) -> f64 {
        let k = d as i32 - 1;
        self.segments().map(|(a, b, s)| p.value(s) * (b.powi(k) - a.powi(k))).sum()
    }

    /// Checks the membership conditions with tolerance `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let pts = &self.points;
        if pts.len() < 2 {
            return Err(Error::Input("a side profile needs at least two points".into()));
        }
        if pts.iter().any(|p| !(p.t.is_finite() && p.y.is_finite())) {
            return Err(Error::Input("profile has non-finite points".into()));
        }
        if pts[0].t != 0.0 || pts[pts.len() - 1].t != 1.0 {
            return Err(Error::Input("profile must span t in [0, 1]".into()));
        }
        if pts.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::Input("profile abscissae must increase".into()));
        }
        if pts.iter().any(|p| p.y > tol) {
            return Err(Error::Input("profile must be non-positive".into()));
        }
        let mut prev = -tol;
        for (_, _, s) in self.segments() {
            if s < prev - tol * (1.0 + s.abs()) {
                return Err(Error::Input("profile is not convex and non-decreasing".into()));
            }
            prev = s;
        }
        Ok(())
    }
}

/// An optimal body: both sides and how the height is split between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyProfile {
    pub d: usize,
    pub h: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub kind: SolutionKind,
    pub f_plus: SideProfile,
    pub f_minus: SideProfile,
}

impl BodyProfile {
    pub fn validate(&self) -> Result<()> {
        let tol = 1e-9 * (1.0 + self.h);
        if self.d < 2 {
            return Err(Error::Input("profile dimension must be at least 2".into()));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::Input("profile height must be non-negative".into()));
        }
        self.f_plus.validate(tol)?;
        self.f_minus.validate(tol)?;
        if (self.h_plus + self.h_minus - self.h).abs() > tol {
            return Err(Error::Input("h_plus + h_minus differs from h".into()));
        }
        if (self.f_plus.height() - self.h_plus).abs() > tol || (self.f_minus.height() - self.h_minus).abs() > tol {
            return Err(Error::Input("side heights disagree with h_plus / h_minus".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: BodyProfile = serde_json::from_str(text).map_err(|e| Error::Input(format!("profile JSON: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    /// Total resistance `R_+(f_+) + R_-(f_-)` of the polylines.
    pub fn resistance(&self, front: &dyn Curve, rear: &dyn Curve) -> f64 {
        self.f_plus.resistance(front, self.d) + self.f_minus.resistance(rear, self.d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_slope_geometry() {
        let s = SideProfile::two_slopes(0.5, 0.0, 1.0);
        assert_eq!(s.points.len(), 3);
        assert!((s.points[1].t - 0.5).abs() < 1e-15);
        assert!((s.value_at(0.75) + 0.25).abs() < 1e-15);
        assert!((s.slope_at(0.2)).abs() < 1e-15);
        s.validate(1e-12).unwrap();
    }

    #[test]
    fn concave_profile_rejected() {
        let s = SideProfile {
            points: vec![ProfilePoint::new(0.0, -1.0), ProfilePoint::new(0.5, 0.0), ProfilePoint::new(1.0, 0.0)],
        };
        assert!(s.validate(1e-12).is_err());
    }
}
