//! `nlperim`: experiment driver for fractional perimeters, curvature,
//! discrete minimizers, the extension energy and fractal dimensions.
//!
//! Exit codes: 0 success, 1 malformed input, 2 tolerance or oracle failure,
//! 3 resource cap.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod shape;

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nlperim::curvature::{fmc_asymptotic_scan, fmc_pv, fmc_pv_quadrature};
use nlperim::extension::{frac_laplacian_direct, frac_laplacian_fourier, phi_trace, Samples};
use nlperim::fractal::{
    box_count, dim_f_from_scan, dim_f_scan, dimension_fit, koch_series_bound, Boundary,
};
use nlperim::geometry::{koch_snowflake, AnalyticShape, PlanarSet, Vec2};
use nlperim::kernel::{FracParams, QuadratureSpec, Region};
use nlperim::minimizer::{
    brute_force_minimize, local_search_minimize, MinimizationProblem, MinimizerReport, Schedule,
};
use nlperim::perimeter::{
    asymptotic_scan, s_perimeter, s_perimeter_global_1d, s_perimeter_global_2d, ScanMode,
};

use output::{Body, OracleMismatch};

#[derive(Parser, Debug)]
#[command(name = "nlperim", version, about = "Fractional perimeter experiments")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "NLPERIM_WORKERS")]
    workers: Option<usize>,

    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    rel_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    abs_tol: f64,
    /// Cells across the region of interest on grid routes.
    #[arg(long, global = true, default_value_t = 64)]
    resolution: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum Command {
    /// P_s(E, Omega) split into local and nonlocal parts, or P_s(E) with --global.
    Perimeter(PerimeterArgs),
    /// (1 - s) P_s against omega_{n-1} P over a list of s.
    Asymptotics(AsymptoticsArgs),
    /// Fractional mean curvature at a boundary point.
    Curvature(CurvatureArgs),
    /// Discrete minimizer of a problem file.
    Minimize(MinimizeArgs),
    /// Extension energy and the fractional Laplacian.
    #[command(subcommand)]
    Extension(ExtensionCommand),
    /// Box counting, Dim_F and the snowflake series.
    Fractal(FractalArgs),
}

fn list(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| e.to_string())
}

#[derive(Args, Debug, Clone, Serialize)]
struct PerimeterArgs {
    /// The set E (shape mini-language or JSON file).
    #[arg(long)]
    set: String,
    /// The reference set Omega.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    s: f64,
    /// Whole-space perimeter; Omega is ignored.
    #[arg(long)]
    global: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Total,
    Local,
}

#[derive(Args, Debug, Clone, Serialize)]
struct AsymptoticsArgs {
    #[arg(long)]
    set: String,
    /// Reference set; the whole space when absent.
    #[arg(long)]
    omega: Option<String>,
    #[arg(long, value_delimiter = ',', value_parser = list, required = true)]
    s_list: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Total)]
    mode: ModeArg,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CurvatureArgs {
    /// A ball, half-space or polygon.
    #[arg(long)]
    set: String,
    /// Boundary point `x,y`.
    #[arg(long, value_delimiter = ',', value_parser = list, num_args = 1)]
    point: Vec<f64>,
    /// Single exponent; give --s-list for a (1 - s) I_s scan instead.
    #[arg(long, required_unless_present = "s_list")]
    s: Option<f64>,
    #[arg(long, value_delimiter = ',', value_parser = list)]
    s_list: Option<Vec<f64>>,
    /// Use radial quadrature even where an exact path exists.
    #[arg(long)]
    generic: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    /// Exhaustive search up to 16 free cells, annealing above.
    Auto,
    Brute,
    Anneal,
}

#[derive(Args, Debug, Clone, Serialize)]
struct MinimizeArgs {
    /// JSON problem file.
    #[arg(long)]
    problem: PathBuf,
    /// Number of annealing runs, seeded `seed, seed + 1, ...`.
    #[arg(long, default_value_t = 8)]
    seeds: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 0.95)]
    alpha: f64,
    /// Initial temperature; the mean flip cost when absent.
    #[arg(long)]
    t0: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "tool", rename_all = "snake_case")]
enum ExtensionCommand {
    /// Phi_E(r) for a set whose boundary passes through the origin.
    Phi {
        #[arg(long)]
        set: String,
        #[arg(long)]
        s: f64,
        #[arg(long, value_delimiter = ',', value_parser = list, default_value = "0.25,0.5,0.75,1")]
        r_list: Vec<f64>,
    },
    /// (-Delta)^s of a sampled Gaussian by the direct and spectral routes.
    Laplacian {
        #[arg(long)]
        s: f64,
        /// Evaluation point.
        #[arg(long, default_value_t = 0.0)]
        x: f64,
        #[arg(long, default_value_t = 0.01)]
        h: f64,
        /// Samples cover `[-half_width, half_width]`.
        #[arg(long, default_value_t = 12.0)]
        half_width: f64,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum FractalMode {
    Boxcount,
    Dimf,
    Series,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FractalArgs {
    /// `koch`, or a set in the shape mini-language.
    target: String,
    /// Snowflake generation.
    #[arg(long, default_value_t = 7)]
    k: usize,
    /// Snowflake side.
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    #[arg(long, value_enum, default_value_t = FractalMode::Boxcount)]
    mode: FractalMode,
    /// Box sides; `3^-1 .. 3^-6` times the side when absent.
    #[arg(long, value_delimiter = ',', value_parser = list)]
    deltas: Option<Vec<f64>>,
    /// Exponents for Dim_F.
    #[arg(long, value_delimiter = ',', value_parser = list, default_value = "0.7,0.71,0.72,0.73,0.74,0.75,0.76,0.77,0.78")]
    s_list: Vec<f64>,
    /// Reference set for Dim_F; a ball of radius 2 * side around the origin when absent.
    #[arg(long)]
    omega: Option<String>,
    /// Exponent for the series.
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Number of series terms.
    #[arg(long, default_value_t = 20)]
    terms: usize,
}

/// Everything that determines the output.
#[derive(Serialize)]
struct RunConfig<'a> {
    #[serde(flatten)]
    common: &'a Common,
    quadrature: &'a QuadratureSpec,
    command: &'a Command,
}

struct Ctx<'a> {
    cfg: RunConfig<'a>,
    files: Vec<Vec<u8>>,
}

impl Ctx<'_> {
    fn parse(&mut self, spec: &str) -> Result<Region> {
        let p = shape::parse(spec)?;
        if let Some(f) = p.file {
            self.files.push(f);
        }
        Ok(p.region)
    }

    fn emit<R: Serialize>(&self, body: Body<R>) -> Result<()> {
        let hash = output::input_hash(&self.cfg, &self.files)?;
        output::write(&self.cfg.common.out, &self.cfg, &hash, body)
    }

    fn emit_json<R: Serialize>(&self, r: &R) -> Result<()> {
        if self.cfg.common.format == Format::Csv {
            bail!("this output is a single JSON document; drop --format csv");
        }
        self.emit(Body::Json(r))
    }

    /// CSV from serializable rows, or the JSON document.
    fn emit_rows<R: Serialize, T: Serialize>(&self, doc: &R, rows: &[T]) -> Result<()> {
        match self.cfg.common.format {
            Format::Json => self.emit(Body::Json(doc)),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r)?;
                }
                let bytes = w.into_inner().map_err(|e| anyhow!("{}", e.error()))?;
                self.emit::<R>(Body::Csv(String::from_utf8(bytes)?))
            }
        }
    }
}

fn dim(r: &Region) -> usize {
    match r {
        Region::Line(_) => 1,
        Region::Plane(_) => 2,
    }
}

fn analytic(r: Region) -> Result<AnalyticShape> {
    match r {
        Region::Plane(PlanarSet::Shape(s)) => Ok(s),
        _ => bail!("this command needs an analytic planar set"),
    }
}

#[derive(Serialize)]
struct GlobalPerimeter {
    total: f64,
    error: f64,
}

fn cmd_perimeter(ctx: &mut Ctx, a: &PerimeterArgs, quad: &QuadratureSpec) -> Result<()> {
    let e = ctx.parse(&a.set)?;
    let params = FracParams::new(dim(&e), a.s)?;
    if a.global {
        let g = match &e {
            Region::Line(iv) => GlobalPerimeter {
                total: s_perimeter_global_1d(iv, a.s)?,
                error: 0.0,
            },
            Region::Plane(p) => {
                let est = s_perimeter_global_2d(p, a.s, quad)?;
                GlobalPerimeter {
                    total: est.value,
                    error: est.error,
                }
            }
        };
        return ctx.emit_json(&g);
    }
    let omega = a
        .omega
        .as_deref()
        .ok_or_else(|| anyhow!("--omega is required unless --global is given"))?;
    let o = ctx.parse(omega)?;
    ctx.emit_json(&s_perimeter(&e, &o, params, quad)?)
}

fn cmd_asymptotics(ctx: &mut Ctx, a: &AsymptoticsArgs, quad: &QuadratureSpec) -> Result<()> {
    let e = ctx.parse(&a.set)?;
    let o = a.omega.as_deref().map(|s| ctx.parse(s)).transpose()?;
    let mode = match a.mode {
        ModeArg::Total => ScanMode::Total,
        ModeArg::Local => ScanMode::Local,
    };
    let t = asymptotic_scan(&e, o.as_ref(), &a.s_list, mode, quad)?;
    ctx.emit_rows(&t, &t.rows)
}

fn cmd_curvature(ctx: &mut Ctx, a: &CurvatureArgs, quad: &QuadratureSpec) -> Result<()> {
    let e = analytic(ctx.parse(&a.set)?)?;
    let [x, y] = a.point.as_slice() else {
        bail!("--point needs x,y")
    };
    let p = Vec2::new(*x, *y);
    if let Some(list) = &a.s_list {
        let t = fmc_asymptotic_scan(&e, p, list, quad)?;
        return ctx.emit_rows(&t, &t.rows);
    }
    let params = FracParams::new(2, a.s.expect("clap requires s"))?;
    let r = if a.generic {
        fmc_pv_quadrature(&e, p, params, quad)?
    } else {
        fmc_pv(&e, p, params, quad)?
    };
    ctx.emit_json(&r)
}

#[derive(Serialize)]
struct MinimizeOutput {
    free_cells: usize,
    best: MinimizerReport,
    runs: Vec<MinimizerReport>,
    /// Exhaustive optimum, when the problem is small enough.
    oracle_energy: Option<f64>,
    oracle_match: Option<bool>,
}

/// Problems at or below this size are also solved exhaustively.
const ORACLE_CELLS: usize = 16;

fn cmd_minimize(ctx: &mut Ctx, a: &MinimizeArgs) -> Result<()> {
    let bytes =
        std::fs::read(&a.problem).with_context(|| format!("reading {}", a.problem.display()))?;
    let prob: MinimizationProblem = serde_json::from_slice(&bytes)
        .with_context(|| format!("parsing {}", a.problem.display()))?;
    ctx.files.push(bytes);
    prob.validate()?;
    let n = prob.free_count();
    let schedule = Schedule {
        t0: a.t0,
        alpha: a.alpha,
        sweeps: a.sweeps,
    };
    let brute = match a.method {
        MethodArg::Brute => true,
        MethodArg::Anneal => false,
        MethodArg::Auto => n <= ORACLE_CELLS,
    };
    let oracle = if brute || n <= ORACLE_CELLS {
        Some(brute_force_minimize(&prob)?)
    } else {
        None
    };
    let base = ctx.cfg.common.seed;
    let runs: Vec<MinimizerReport> = if a.method == MethodArg::Brute {
        Vec::new()
    } else {
        (0..a.seeds)
            .map(|k| local_search_minimize(&prob, schedule, base + k))
            .collect::<nlperim::Result<_>>()?
    };
    let best_run = runs
        .iter()
        .min_by(|x, y| x.energy.total_cmp(&y.energy))
        .cloned();
    let scale = prob.model()?.scale;
    let oracle_match = match (&oracle, &best_run) {
        (Some(o), Some(b)) => Some(b.energy <= o.energy + 1e-9 * scale),
        _ => None,
    };
    let best = if brute { oracle.clone() } else { best_run }
        .ok_or_else(|| anyhow!("no runs requested"))?;
    let out = MinimizeOutput {
        free_cells: n,
        best,
        runs,
        oracle_energy: oracle.as_ref().map(|o| o.energy),
        oracle_match,
    };
    ctx.emit_json(&out)?;
    if oracle_match == Some(false) {
        return Err(OracleMismatch("annealing did not reach the exhaustive optimum".into()).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct LaplacianOutput {
    x: f64,
    direct: f64,
    spectral: f64,
    relative_gap: f64,
}

fn cmd_extension(ctx: &mut Ctx, c: &ExtensionCommand, quad: &QuadratureSpec) -> Result<()> {
    match c {
        ExtensionCommand::Phi { set, s, r_list } => {
            let e = ctx.parse(set)?;
            let Region::Plane(p) = e else {
                bail!("Phi needs a planar set")
            };
            let t = phi_trace(&p, r_list, FracParams::new(2, *s)?, quad)?;
            ctx.emit_rows(&t, &t.rows)
        }
        ExtensionCommand::Laplacian {
            s,
            x,
            h,
            half_width,
        } => {
            if !(*h > 0.0 && *half_width > *h) {
                bail!("need 0 < h < half_width");
            }
            let m = (2.0 * half_width / h).round() as usize + 1;
            let u = Samples::from_fn(-half_width, *h, m, |t| (-t * t).exp());
            let k = ((x + half_width) / h).round();
            if !(0.0..m as f64).contains(&k) || ((x + half_width) / h - k).abs() > 1e-9 {
                bail!("--x must be a sample point inside the window");
            }
            let direct = frac_laplacian_direct(&u, *x, *s, quad)?;
            let spectral = frac_laplacian_fourier(&u, *s, false)?.values[k as usize];
            ctx.emit_json(&LaplacianOutput {
                x: *x,
                direct,
                spectral,
                relative_gap: (direct / spectral - 1.0).abs(),
            })
        }
    }
}

#[derive(Serialize)]
struct BoxCountOutput {
    trace: nlperim::fractal::BoxCountTrace,
    fit: nlperim::fractal::DimensionEstimate,
}

#[derive(Serialize)]
struct DimFOutput {
    rows: Vec<nlperim::fractal::LadderRow>,
    estimate: nlperim::fractal::DimensionEstimate,
}

#[derive(Serialize)]
struct LadderCsv {
    s: f64,
    limit_ratio: f64,
    divergent: bool,
    finest: f64,
}

#[derive(Serialize)]
struct SeriesCsv {
    k: usize,
    partial_sum: f64,
}

fn boundary_of(r: &Region) -> Result<Boundary> {
    let closed = |mut v: Vec<Vec2>| {
        v.push(v[0]);
        Boundary::Polylines(vec![v])
    };
    Ok(match r {
        Region::Plane(PlanarSet::Koch(k)) => Boundary::koch(k),
        Region::Plane(PlanarSet::Grid(g)) => Boundary::Grid(g.clone()),
        Region::Plane(PlanarSet::Shape(AnalyticShape::Polygon { vertices })) => {
            closed(vertices.clone())
        }
        Region::Plane(PlanarSet::Shape(AnalyticShape::Ball { center, radius })) => closed(
            (0..4096)
                .map(|j| *center + Vec2::polar(std::f64::consts::TAU * j as f64 / 4096.0) * *radius)
                .collect(),
        ),
        _ => bail!("box counting needs a bounded planar set"),
    })
}

fn cmd_fractal(ctx: &mut Ctx, a: &FractalArgs, quad: &QuadratureSpec) -> Result<()> {
    let target = if a.target == "koch" {
        if !(a.side > 0.0) || a.k > 9 {
            bail!("koch needs --side > 0 and --k at most 9");
        }
        Region::Plane(PlanarSet::Koch(koch_snowflake(a.k, a.side)))
    } else {
        ctx.parse(&a.target)?
    };
    match a.mode {
        FractalMode::Boxcount => {
            let deltas = a
                .deltas
                .clone()
                .unwrap_or_else(|| (1..=6).map(|k| a.side * 3f64.powi(-k)).collect());
            let trace = box_count(&boundary_of(&target)?, &deltas)?;
            let fit = dimension_fit(&trace)?;
            ctx.emit_rows(
                &BoxCountOutput {
                    trace: trace.clone(),
                    fit,
                },
                &trace.rows,
            )
        }
        FractalMode::Dimf => {
            let omega = match &a.omega {
                Some(o) => ctx.parse(o)?,
                None => match dim(&target) {
                    1 => Region::Line(nlperim::geometry::IntervalSet::interval(
                        -2.0 * a.side,
                        2.0 * a.side,
                    )?),
                    _ => Region::Plane(PlanarSet::Shape(AnalyticShape::ball(
                        Vec2::default(),
                        2.0 * a.side,
                    )?)),
                },
            };
            let rows = dim_f_scan(&target, &omega, &a.s_list, quad)?;
            let estimate = dim_f_from_scan(&rows, dim(&target))?;
            let flat: Vec<LadderCsv> = rows
                .iter()
                .map(|r| LadderCsv {
                    s: r.s,
                    limit_ratio: r.limit_ratio,
                    divergent: r.divergent,
                    finest: *r.values.last().unwrap(),
                })
                .collect();
            ctx.emit_rows(&DimFOutput { rows, estimate }, &flat)
        }
        FractalMode::Series => {
            let k = koch_series_bound(a.s, a.terms)?;
            let flat: Vec<SeriesCsv> = k
                .partial_sums
                .iter()
                .enumerate()
                .map(|(k, v)| SeriesCsv { k, partial_sum: *v })
                .collect();
            ctx.emit_rows(&k, &flat)
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let quad = QuadratureSpec {
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        resolution: c.resolution,
        ..QuadratureSpec::default()
    };
    quad.validate()?;
    let mut ctx = Ctx {
        cfg: RunConfig {
            common: c,
            quadrature: &quad,
            command: &cli.command,
        },
        files: Vec::new(),
    };
    match &cli.command {
        Command::Perimeter(a) => cmd_perimeter(&mut ctx, a, &quad),
        Command::Asymptotics(a) => cmd_asymptotics(&mut ctx, a, &quad),
        Command::Curvature(a) => cmd_curvature(&mut ctx, a, &quad),
        Command::Minimize(a) => cmd_minimize(&mut ctx, a),
        Command::Extension(e) => cmd_extension(&mut ctx, e, &quad),
        Command::Fractal(a) => cmd_fractal(&mut ctx, a, &quad),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                output::EXIT_INPUT
            } else {
                0
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be positive");
            std::process::exit(output::EXIT_INPUT);
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
    if let Err(e) = run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(output::exit_code(&e));
    }
}
