use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use minres::asymptotics::{limit_coefficients, limit_profile_large_v, limit_profile_small_v};
use minres::medium::{flux_density, DensitySpec, RadialDensity, ViolationPolicy};
use minres::montecarlo::estimate_resistance;
use minres::pressure::{pressure, PressureCurve};
use minres::solve2d::{at_speed, landmarks_on_grid};
use minres::solve_nd::{h_star_curve, NdAnalysis};
use minres::{BodyProfile, Error, FlowAnalysis, FlowContext, Result, Side, SolveReport};

mod svg;

#[derive(Parser)]
#[command(name = "minres", version, about = "Minimal-resistance bodies in a rarefied medium with thermal motion")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Optimal body for one (V, h)
    Solve {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long)]
        h: f64,
        /// Use the slow- or fast-body limit instead of the full pressure
        #[arg(long, value_enum)]
        limit: Option<Limit>,
        /// Write the profile JSON here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a silhouette SVG here
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Region boundaries over a grid of speeds
    Regions {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, value_name = "lo:hi:n")]
        v_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Minimal resistance over a (V, h) grid
    Sweep {
        #[command(flatten)]
        flow: FlowArgs,
        /// Defaults to the single speed --v
        #[arg(long, value_name = "lo:hi:n")]
        v_grid: Option<String>,
        #[arg(long, value_name = "lo:hi:n")]
        h_grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo check of a resistance value
    Validate {
        #[command(flatten)]
        flow: FlowArgs,
        /// Solve at this height and check the optimal body
        #[arg(long, conflicts_with = "profile")]
        h: Option<f64>,
        /// Check a profile JSON (or the output of `solve`)
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a profile JSON or a regions/sweep CSV as SVG
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct FlowArgs {
    /// Dimension of the space (taken from the density file if omitted)
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    v: f64,
    /// Density as JSON, or a two-column `r,sigma` CSV (needs --d)
    #[arg(long, conflicts_with = "gaussian")]
    density: Option<PathBuf>,
    /// Unit Gaussian density (the default)
    #[arg(long)]
    gaussian: bool,
    /// Relative quadrature tolerance
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Limit {
    SmallV,
    LargeV,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Input(format!("{}: {e}", p.display()))),
        None => emit(text),
    }
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Input(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

impl FlowArgs {
    fn density(&self) -> Result<RadialDensity> {
        let Some(path) = &self.density else {
            return RadialDensity::gaussian(self.d.unwrap_or(2));
        };
        let text = read(path)?;
        let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
        let density = if is_csv {
            let d = self.d.ok_or_else(|| Error::Input("a CSV density needs --d".into()))?;
            RadialDensity::from_csv(d, &text, ViolationPolicy::Reject)?
        } else {
            let spec: DensitySpec =
                serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            RadialDensity::from_spec(&spec)?
        };
        if let Some(d) = self.d {
            if d != density.dim() {
                return Err(Error::Input(format!("--d {d} disagrees with the density file (d = {})", density.dim())));
            }
        }
        Ok(density)
    }

    fn context(&self) -> Result<FlowContext> {
        let mut ctx = FlowContext::new(self.density()?, self.v)?;
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::Input(format!("--tol must lie in (0, 1), got {tol}")));
            }
            ctx.quad_rel = tol;
        }
        Ok(ctx)
    }
}

/// `lo:hi:n` (n evenly spaced points) or a comma-separated list.
fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| Error::Input(format!("bad grid value '{x}' in '{s}'")));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| Error::Input(format!("bad point count in '{s}'")))?;
            match n {
                0 => vec![],
                1 => vec![lo],
                _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
            }
        }
        [_] if s.trim().is_empty() => vec![],
        [list] => list.split(',').map(num).collect::<Result<_>>()?,
        _ => return Err(Error::Input(format!("grid must be lo:hi:n or a list, got '{s}'"))),
    };
    if grid.is_empty() {
        return Err(Error::Input(format!("grid '{s}' is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input(format!("grid '{s}' has non-finite values")));
    }
    Ok(grid)
}

/// Sorted, duplicates dropped with a warning.
fn dedup_grid(mut grid: Vec<f64>, name: &str) -> Vec<f64> {
    let n = grid.len();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < n {
        eprintln!("warning: dropped {} duplicate {name} grid point(s)", n - grid.len());
    }
    grid
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Serialize)]
struct LimitReport {
    mode: &'static str,
    d: usize,
    #[serde(rename = "V")]
    v: f64,
    h: f64,
    /// `R/V` (slow) or `R/V^2` (fast).
    reduced_resistance: f64,
    /// The limit value rescaled to the requested speed.
    #[serde(rename = "R_approx")]
    r_approx: f64,
}

fn cmd_solve(flow: &FlowArgs, h: f64, limit: Option<Limit>, out: Option<&Path>, svg_path: Option<&Path>) -> Result<()> {
    let ctx = flow.context()?;
    let (body, report) = match limit {
        None => {
            let (body, report) = minres::solve(&ctx, h)?;
            (body, serde_json::to_value(&report).expect("report serializes"))
        }
        Some(mode) => {
            let d = ctx.dim();
            let (sol, name, r_approx) = match mode {
                Limit::SmallV => {
                    let k = limit_coefficients(&ctx.density)?;
                    let sol = limit_profile_small_v(d, h, k.c)?;
                    let r = sol.reduced_resistance * ctx.v;
                    (sol, "small-v", r)
                }
                Limit::LargeV => {
                    let sol = limit_profile_large_v(d, h, flux_density(&ctx.density)?)?;
                    let r = sol.reduced_resistance * ctx.v * ctx.v;
                    (sol, "large-v", r)
                }
            };
            let report =
                LimitReport { mode: name, d, v: ctx.v, h, reduced_resistance: sol.reduced_resistance, r_approx };
            (sol.body, serde_json::to_value(&report).expect("report serializes"))
        }
    };
    let doc = serde_json::json!({ "profile": body, "report": report });
    emit(&format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")))?;
    if let Some(p) = out {
        write_out(Some(p), &body.to_json())?;
    }
    if let Some(p) = svg_path {
        write_out(Some(p), &svg::profile_svg(&body))?;
    }
    Ok(())
}

fn cmd_regions(flow: &FlowArgs, v_grid: &str, out: Option<&Path>, svg_path: Option<&Path>) -> Result<()> {
    let grid = dedup_grid(parse_grid(v_grid)?, "V");
    let template = flow.context()?;
    let mut csv = String::new();
    let warn = |v: f64, e: &Error| eprintln!("warning: V = {v}: {e}");
    let (x, cols) = if template.dim() == 2 {
        csv.push_str("V,u_plus0,u_star,u_star_plus_u_minus0\n");
        let rows = landmarks_on_grid(&template, &grid)?;
        let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
        for (&v, lm) in grid.iter().zip(rows) {
            let vals = match lm {
                Ok(lm) => [lm.u_plus0, lm.u_star, lm.u_star + lm.u_minus0],
                Err(e) => {
                    warn(v, &e);
                    [f64::NAN; 3]
                }
            };
            let _ = writeln!(csv, "{},{},{},{}", num(v), num(vals[0]), num(vals[1]), num(vals[2]));
            for (c, x) in cols.iter_mut().zip(vals) {
                c.push(x);
            }
        }
        let names = ["u_plus0", "u_star", "u_star_plus_u_minus0"];
        (grid.clone(), names.iter().map(|s| s.to_string()).zip(cols).collect::<Vec<_>>())
    } else {
        csv.push_str("V,h_star\n");
        let rows = h_star_curve(&template, &grid)?;
        let mut col = Vec::new();
        for (&v, hs) in grid.iter().zip(rows) {
            let hs = hs.unwrap_or_else(|e| {
                warn(v, &e);
                f64::NAN
            });
            let _ = writeln!(csv, "{},{}", num(v), num(hs));
            col.push(hs);
        }
        (grid.clone(), vec![("h_star".to_string(), col)])
    };
    write_out(out, &csv)?;
    if let Some(p) = svg_path {
        write_out(Some(p), &svg::regions_svg(&x, &cols, "V", "h"))?;
    }
    Ok(())
}

enum Solver {
    Planar(Box<FlowAnalysis>),
    Spatial(Box<NdAnalysis>),
}

impl Solver {
    fn new(ctx: &FlowContext) -> Result<Self> {
        let fa = FlowAnalysis::new(ctx)?;
        Ok(if fa.dim() == 2 { Solver::Planar(Box::new(fa)) } else { Solver::Spatial(Box::new(NdAnalysis::new(fa)?)) })
    }

    fn solve(&self, h: f64) -> Result<SolveReport> {
        match self {
            Solver::Planar(fa) => minres::flow::solve_with(fa, h).map(|(_, r)| r),
            Solver::Spatial(nd) => nd.solve(h).map(|(_, r)| r),
        }
    }
}

fn cmd_sweep(flow: &FlowArgs, v_grid: Option<&str>, h_grid: &str, out: Option<&Path>) -> Result<()> {
    let vs = match v_grid {
        Some(g) => dedup_grid(parse_grid(g)?, "V"),
        None => vec![flow.v],
    };
    let hs = dedup_grid(parse_grid(h_grid)?, "h");
    if let Some(h) = hs.iter().find(|h| h.is_nan() || **h <= 0.0) {
        return Err(Error::Domain(format!("heights must be positive, got {h}")));
    }
    let template = flow.context()?;
    let blocks: Vec<Vec<std::result::Result<SolveReport, String>>> = vs
        .par_iter()
        .map(|&v| {
            let solver = at_speed(&template, v).and_then(|ctx| Solver::new(&ctx));
            match solver {
                Ok(s) => hs.iter().map(|&h| s.solve(h).map_err(|e| e.to_string())).collect(),
                Err(e) => vec![Err(e.to_string()); hs.len()],
            }
        })
        .collect();
    let mut csv = String::from("V,h,R,R_tilde,kind\n");
    for (&v, block) in vs.iter().zip(blocks) {
        let mut prev = f64::INFINITY;
        for (&h, row) in hs.iter().zip(block) {
            match row {
                Ok(r) => {
                    if r.r_tilde > prev * (1.0 + 1e-9) {
                        eprintln!("warning: V = {v}: R_tilde increases at h = {h}");
                    }
                    prev = r.r_tilde;
                    let _ = writeln!(csv, "{},{},{},{},{}", num(v), num(h), num(r.r), num(r.r_tilde), r.kind.as_str());
                }
                Err(e) => {
                    eprintln!("warning: V = {v}, h = {h}: {e}");
                    let _ = writeln!(csv, "{},{},NaN,NaN,error", num(v), num(h));
                }
            }
        }
    }
    write_out(out, &csv)
}

/// Accepts a bare profile or the `{"profile", "report"}` output of `solve`.
fn load_profile(text: &str) -> Result<BodyProfile> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("profile JSON: {e}")))?;
    let inner = value.get("profile").cloned().unwrap_or(value);
    let body: BodyProfile = serde_json::from_value(inner).map_err(|e| Error::Input(format!("profile JSON: {e}")))?;
    body.validate()?;
    Ok(body)
}

#[derive(Serialize)]
struct ValidateReport {
    #[serde(rename = "R_mc")]
    r_mc: f64,
    se: f64,
    #[serde(rename = "R_analytic")]
    r_analytic: f64,
    z_score: f64,
    n: u64,
    seed: u64,
}

fn cmd_validate(flow: &FlowArgs, h: Option<f64>, profile: Option<&Path>, samples: u64, seed: u64) -> Result<()> {
    let ctx = flow.context()?;
    let (body, analytic) = if let Some(path) = profile {
        let body = load_profile(&read(path)?)?;
        let model = Arc::new(minres::pressure::PressureModel::new(&ctx)?);
        let front = PressureCurve::from_model(model.clone(), Side::Front)?;
        let rear = PressureCurve::from_model(model, Side::Rear)?;
        let r = body.resistance(&front, &rear);
        (body, r)
    } else if let Some(h) = h {
        let (body, report) = minres::solve(&ctx, h)?;
        (body, report.r)
    } else {
        let disk = BodyProfile {
            d: ctx.dim(),
            h: 0.0,
            h_plus: 0.0,
            h_minus: 0.0,
            kind: minres::SolutionKind::Trapezium,
            f_plus: minres::profile::SideProfile::flat(),
            f_minus: minres::profile::SideProfile::flat(),
        };
        let r = pressure(&ctx, Side::Front, 0.0)? + pressure(&ctx, Side::Rear, 0.0)?;
        (disk, r)
    };
    let mc = estimate_resistance(&body, &ctx, samples, seed)?;
    let report = ValidateReport {
        r_mc: mc.mean,
        se: mc.se,
        r_analytic: analytic,
        z_score: (mc.mean - analytic) / mc.se,
        n: mc.n,
        seed,
    };
    emit(&format!("{}\n", serde_json::to_string_pretty(&report).expect("json")))?;
    Ok(())
}

fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Input("empty CSV".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(|s| s.trim().to_string()).collect()).collect();
    if rows.iter().any(|r| r.len() != header.len()) {
        return Err(Error::Input("ragged CSV".into()));
    }
    Ok((header, rows))
}

fn column(rows: &[Vec<String>], k: usize) -> Result<Vec<f64>> {
    rows.iter().map(|r| r[k].parse::<f64>().map_err(|_| Error::Input(format!("not a number: '{}'", r[k])))).collect()
}

fn cmd_plot(input: &Path, out: Option<&Path>) -> Result<()> {
    let text = read(input)?;
    if text.trim_start().starts_with('{') {
        return write_out(out, &svg::profile_svg(&load_profile(&text)?));
    }
    let (header, rows) = parse_csv(&text)?;
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let image = match h.as_slice() {
        ["V", "u_plus0", "u_star", "u_star_plus_u_minus0"] | ["V", "h_star"] => {
            let x = column(&rows, 0)?;
            let cols = (1..h.len()).map(|k| Ok((h[k].to_string(), column(&rows, k)?))).collect::<Result<Vec<_>>>()?;
            svg::regions_svg(&x, &cols, "V", "h")
        }
        ["V", "h", "R", "R_tilde", "kind"] => {
            let v = column(&rows, 0)?;
            let hh = column(&rows, 1)?;
            let rt = column(&rows, 3)?;
            let mut speeds: Vec<f64> = v.clone();
            speeds.dedup();
            // one curve per speed; heights differ only if the sweep grid did
            let x: Vec<f64> = hh.iter().zip(&v).filter(|(_, vv)| **vv == speeds[0]).map(|(h, _)| *h).collect();
            let series = speeds
                .iter()
                .map(|s| {
                    let ys: Vec<f64> = rt.iter().zip(&v).filter(|(_, vv)| *vv == s).map(|(r, _)| *r).collect();
                    (format!("V = {s}"), ys)
                })
                .collect::<Vec<_>>();
            svg::lines_svg(&x, &series, "h", "R / V^2")
        }
        _ => return Err(Error::Input(format!("unrecognised CSV header: {}", header.join(",")))),
    };
    write_out(out, &image)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) => 1,
        Error::Domain(_) | Error::Unsupported(_) => 2,
        Error::Numeric { .. } | Error::Precondition(_) | Error::Invariant(_) => 3,
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("MINRES_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Input(format!("MINRES_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Input(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match &cli.cmd {
        Cmd::Solve { flow, h, limit, out, svg } => cmd_solve(flow, *h, *limit, out.as_deref(), svg.as_deref()),
        Cmd::Regions { flow, v_grid, out, svg } => cmd_regions(flow, v_grid, out.as_deref(), svg.as_deref()),
        Cmd::Sweep { flow, v_grid, h_grid, out } => cmd_sweep(flow, v_grid.as_deref(), h_grid, out.as_deref()),
        Cmd::Validate { flow, h, profile, samples, seed } => {
            cmd_validate(flow, *h, profile.as_deref(), *samples, *seed)
        }
        Cmd::Plot { input, out } => cmd_plot(input, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
