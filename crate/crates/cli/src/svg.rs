//! Minimal deterministic SVG writer: fixed canvas, fixed number formatting.

use std::fmt::Write;

use minres::BodyProfile;

const W: f64 = 480.0;
const H: f64 = 480.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64, equal: bool) -> Self {
        let (mut sx, mut sy) = ((W - 2.0 * PAD) / (x1 - x0).max(1e-12), (H - 2.0 * PAD) / (y1 - y0).max(1e-12));
        if equal {
            let s = sx.min(sy);
            sx = s;
            sy = s;
        }
        Frame { x0, x1, y0, y1, sx, sy }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) * self.sx
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) * self.sy
    }

    fn path(&self, pts: &[(f64, f64)]) -> String {
        let mut s = String::new();
        for (i, &(x, y)) in pts.iter().enumerate() {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let _ = write!(s, "{}{:.3},{:.3} ", if i == 0 || s.is_empty() { "M" } else { "L" }, self.px(x), self.py(y));
        }
        s.trim_end().to_string()
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#444" stroke-width="0.8"/>"##,
            self.px(self.x0),
            self.py(self.y1),
            (self.x1 - self.x0) * self.sx,
            (self.y1 - self.y0) * self.sy
        );
        for (x, y, anchor, text) in [
            (self.px(self.x0), self.py(self.y0) + 16.0, "start", format!("{:.3}", self.x0)),
            (self.px(self.x1), self.py(self.y0) + 16.0, "end", format!("{:.3}", self.x1)),
            (self.px(self.x0) - 4.0, self.py(self.y0), "end", format!("{:.3}", self.y0)),
            (self.px(self.x0) - 4.0, self.py(self.y1) + 10.0, "end", format!("{:.3}", self.y1)),
            (0.5 * (self.px(self.x0) + self.px(self.x1)), H - 12.0, "middle", xlabel.to_string()),
            (14.0, 0.5 * (self.py(self.y0) + self.py(self.y1)), "middle", ylabel.to_string()),
        ] {
            let _ = writeln!(out, r#"<text x="{x:.3}" y="{y:.3}" font-size="11" text-anchor="{anchor}">{text}</text>"#);
        }
    }
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Axial section of the body, front side up.
pub fn profile_svg(body: &BodyProfile) -> String {
    let mut outline: Vec<(f64, f64)> = Vec::new();
    // front: x_d = -f_+(|x|) from the right rim over the top to the left rim
    for p in body.f_plus.points.iter().rev() {
        outline.push((p.t, -p.y));
    }
    for p in body.f_plus.points.iter().skip(1) {
        outline.push((-p.t, -p.y));
    }
    // rear: x_d = f_-(|x|), back to the right rim
    for p in body.f_minus.points.iter().rev().skip(1) {
        outline.push((-p.t, p.y));
    }
    for p in body.f_minus.points.iter().skip(1) {
        outline.push((p.t, p.y));
    }
    let top = body.h_plus.max(0.05);
    let bottom = -body.h_minus.max(0.05);
    let f = Frame::new(-1.1, 1.1, bottom - 0.1, top + 0.1, true);
    let mut out = header();
    let _ = writeln!(out, r##"<path d="{} Z" fill="#dde6f0" stroke="#1f3b5a" stroke-width="1.2"/>"##, f.path(&outline));
    let _ = writeln!(
        out,
        r##"<text x="{:.3}" y="20" font-size="12" text-anchor="middle">d = {}, h = {}, {}</text>"##,
        W / 2.0,
        body.d,
        body.h,
        body.kind.as_str()
    );
    out.push_str("</svg>\n");
    out
}

/// Line chart of several named series over a common abscissa column.
pub fn lines_svg(x: &[f64], series: &[(String, Vec<f64>)], xlabel: &str, ylabel: &str) -> String {
    let finite = |v: &&f64| v.is_finite();
    let xs: Vec<f64> = x.iter().filter(finite).copied().collect();
    let ys: Vec<f64> = series.iter().flat_map(|(_, v)| v.iter().filter(finite).copied()).collect();
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let y0 = y0.min(0.0);
    let f = Frame::new(x0, x1, y0, y1 + 0.05 * (y1 - y0).max(1e-9), false);
    let mut out = header();
    f.axes(&mut out, xlabel, ylabel);
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = x.iter().copied().zip(ys.iter().copied()).collect();
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, f.path(&pts));
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-size="11" fill="{color}">{name}</text>"#,
            PAD + 8.0,
            PAD + 14.0 * (k as f64 + 1.0)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Region map: the boundary curves with the bands between them shaded.
pub fn regions_svg(x: &[f64], bounds_cols: &[(String, Vec<f64>)], xlabel: &str, ylabel: &str) -> String {
    let ys: Vec<f64> = bounds_cols.iter().flat_map(|(_, v)| v.iter().copied().filter(|y| y.is_finite())).collect();
    let (x0, x1) = bounds(x);
    let (_, y1) = bounds(&ys);
    let top = 1.15 * y1;
    let f = Frame::new(x0, x1, 0.0, top, false);
    let mut out = header();
    let fills = ["#e8f0fa", "#fdeaea", "#eaf6ea", "#f3ecf8"];
    let mut lower: Vec<(f64, f64)> = x.iter().map(|&v| (v, 0.0)).collect();
    let mut cols: Vec<Vec<f64>> = bounds_cols.iter().map(|(_, c)| c.clone()).collect();
    cols.push(vec![top; x.len()]);
    for (k, col) in cols.iter().enumerate() {
        let upper: Vec<(f64, f64)> = x.iter().copied().zip(col.iter().copied()).collect();
        let mut band = lower.clone();
        band.extend(upper.iter().rev());
        let _ = writeln!(out, r#"<path d="{} Z" fill="{}" stroke="none"/>"#, f.path(&band), fills[k % fills.len()]);
        lower = upper;
    }
    for (k, (name, col)) in bounds_cols.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<(f64, f64)> = x.iter().copied().zip(col.iter().copied()).collect();
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, f.path(&pts));
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-size="11" fill="{color}">{name}</text>"#,
            PAD + 8.0,
            PAD + 14.0 * (k as f64 + 1.0)
        );
    }
    f.axes(&mut out, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}
