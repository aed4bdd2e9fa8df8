//! Per-flow precomputation shared by the solvers: both pressure curves, their
//! envelopes and the landmarks `u_+^0, B_+, u_-^0, B_-, u*`.

use std::sync::Arc;

use serde::Serialize;

use crate::envelope::{build_envelope, find_u_star, EnvelopeAnalysis};
use crate::error::{Error, Result};
use crate::medium::ball_volume;
use crate::pressure::{FlowContext, PressureCurve, PressureModel, Side};
use crate::profile::{BodyProfile, SolutionKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Landmarks {
    pub u_plus0: f64,
    pub b_plus: f64,
    pub u_minus0: f64,
    pub b_minus: f64,
    pub u_star: f64,
}

#[derive(Debug, Clone)]
pub struct FlowAnalysis {
    pub ctx: FlowContext,
    pub model: Arc<PressureModel>,
    pub front_curve: Arc<PressureCurve>,
    pub rear_curve: Arc<PressureCurve>,
    pub front: EnvelopeAnalysis,
    pub rear: EnvelopeAnalysis,
    pub landmarks: Landmarks,
}

impl FlowAnalysis {
    pub fn new(ctx: &FlowContext) -> Result<Self> {
        let model = Arc::new(PressureModel::new(ctx)?);
        let front_curve = Arc::new(PressureCurve::from_model(model.clone(), Side::Front)?);
        let rear_curve = Arc::new(PressureCurve::from_model(model.clone(), Side::Rear)?);
        let front = build_envelope(front_curve.clone())?;
        let rear = build_envelope(rear_curve.clone())?;
        let u_star = find_u_star(&front, &rear)?;
        let landmarks =
            Landmarks { u_plus0: front.u0(), b_plus: front.b(), u_minus0: rear.u0(), b_minus: rear.b(), u_star };
        Ok(FlowAnalysis { ctx: ctx.clone(), model, front_curve, rear_curve, front, rear, landmarks })
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    pub fn envelope(&self, side: Side) -> &EnvelopeAnalysis {
        match side {
            Side::Front => &self.front,
            Side::Rear => &self.rear,
        }
    }

    pub fn curve(&self, side: Side) -> &PressureCurve {
        match side {
            Side::Front => &self.front_curve,
            Side::Rear => &self.rear_curve,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    /// Residual of the split equation (0 when no root was needed).
    pub root_residual: f64,
    pub iterations: usize,
    /// Some envelope component has a bitangent touching the curve inside.
    pub tie: bool,
    pub tangency_residual: f64,
    /// `|R - (R_+(f_+) + R_-(f_-))|` with the sides integrated directly.
    pub value_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub d: usize,
    #[serde(rename = "V")]
    pub v: f64,
    pub h: f64,
    /// Minimal resistance `R(h)`, without the `a_{d-1}` factor.
    #[serde(rename = "R")]
    pub r: f64,
    /// `R / V^2`.
    #[serde(rename = "R_tilde")]
    pub r_tilde: f64,
    pub h_plus: f64,
    pub h_minus: f64,
    pub kind: SolutionKind,
    pub landmarks: Landmarks,
    /// `h*` for d >= 3.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_star: Option<f64>,
    pub diagnostics: Diagnostics,
    /// Volume of the unit ball in `R^{d-1}`; the force is `a_{d-1} R`.
    pub a_dm1: f64,
}

impl SolveReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        fa: &FlowAnalysis,
        h: f64,
        r: f64,
        body: &BodyProfile,
        h_star: Option<f64>,
        diagnostics: Diagnostics,
    ) -> Self {
        let v = fa.ctx.v;
        let d = fa.dim();
        SolveReport {
            d,
            v,
            h,
            r,
            r_tilde: r / (v * v),
            h_plus: body.h_plus,
            h_minus: body.h_minus,
            kind: body.kind,
            landmarks: fa.landmarks,
            h_star,
            diagnostics,
            a_dm1: ball_volume(d - 1),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub(crate) fn check_height(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("height h must be positive and finite, got {h}")));
    }
    Ok(())
}

/// Solves the problem for any `d >= 2`.
pub fn solve(ctx: &FlowContext, h: f64) -> Result<(BodyProfile, SolveReport)> {
    check_height(h)?;
    let fa = FlowAnalysis::new(ctx)?;
    solve_with(&fa, h)
}

/// As [`solve`], reusing a precomputed analysis.
pub fn solve_with(fa: &FlowAnalysis, h: f64) -> Result<(BodyProfile, SolveReport)> {
    if fa.dim() == 2 {
        crate::solve2d::solve_2d_with(fa, h)
    } else {
        crate::solve_nd::NdAnalysis::new(fa.clone())?.solve(h)
    }
}
