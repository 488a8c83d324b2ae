//! `fracdim` command-line front end.
//!
//! Every command is a pure function of its input files and flags. Worker
//! count comes from `FRACDIM_THREADS` (unset or 0 means one per core) and
//! never changes any output byte.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracdim::bench::{run_bench, BenchConfig};
use fracdim::dimension::{default_scale_vector, estimate_from_curve, sample_scaling_curve, DEFAULT_MIN_R2};
use fracdim::reference::{box_count_dimension, default_box_sizes, information_dimension};
use fracdim::synth::{rasterize_polyline, sample_weierstrass, sierpinski_raster, LineStyle, WeierstrassParams};
use fracdim::{Codec, RangePolicy, ScaleMode};

pub mod image_io;
pub mod report;
pub mod svg;

use report::{join_f64, join_usize, write_file, RunManifest};

pub const THREADS_ENV: &str = "FRACDIM_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INSUFFICIENT: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<fracdim::Error> for CliError {
    fn from(e: fracdim::Error) -> Self {
        let code = match e {
            fracdim::Error::InsufficientData(_) => EXIT_INSUFFICIENT,
            _ => EXIT_INPUT,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fracdim", version, about = "Fractal dimension from lossless compressed size")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the compression dimension of an image.
    Estimate(EstimateArgs),
    /// Write a synthetic fractal image.
    Generate(GenerateArgs),
    /// Box-counting or information dimension of an image.
    Reference(ReferenceArgs),
    /// Weierstrass sweep over plot density and scale-prefix length.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangeArg {
    Auto,
    Explicit(usize, usize),
    Prefix(usize),
}

impl RangeArg {
    fn policy(self, min_r2: f64) -> RangePolicy {
        match self {
            RangeArg::Auto => RangePolicy::Auto { min_r2 },
            RangeArg::Explicit(a, b) => RangePolicy::Explicit(a, b),
            RangeArg::Prefix(n) => RangePolicy::Prefix(n),
        }
    }
}

fn parse_range(s: &str) -> Result<RangeArg, String> {
    let bad = || format!("expected auto, <i:j> or ns=<k>, got {s:?}");
    if s == "auto" {
        return Ok(RangeArg::Auto);
    }
    if let Some(k) = s.strip_prefix("ns=") {
        return k.parse().map(RangeArg::Prefix).map_err(|_| bad());
    }
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok(RangeArg::Explicit(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

fn parse_mode(s: &str) -> Result<ScaleMode, String> {
    s.parse().map_err(|e: fracdim::Error| e.to_string())
}

fn parse_codec(s: &str) -> Result<Codec, String> {
    s.parse().map_err(|e: fracdim::Error| e.to_string())
}

fn parse_canvas(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected <width>x<height>, got {s:?}");
    let (w, h) = s.split_once('x').ok_or_else(bad)?;
    Ok((w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?))
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    pub input: PathBuf,
    /// Comma-separated scale percents, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = default_scale_vector())]
    pub scales: Vec<f64>,
    /// gray (area average), bw (monochrome after averaging) or resize (tent filter).
    #[arg(long, default_value = "gray", value_parser = parse_mode)]
    pub mode: ScaleMode,
    /// deflate or rlehuff.
    #[arg(long, default_value = "deflate", value_parser = parse_codec)]
    pub codec: Codec,
    /// auto, <first:last> (inclusive sample indices) or ns=<k> (first k scales).
    #[arg(long, default_value = "auto", value_parser = parse_range)]
    pub range: RangeArg,
    /// Minimum R² for the automatic range.
    #[arg(long, default_value_t = DEFAULT_MIN_R2)]
    pub min_r2: f64,
    #[arg(long, default_value_t = fracdim::raster::DEFAULT_THRESHOLD)]
    pub threshold: u8,
    /// Scaling-curve CSV path; defaults to `<input stem>.scaling.csv` beside the input.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Optional log-log plot.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub kind: GenerateKind,
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// Plot of W(t) = Σ γ^(-nα) cos(2π γ^n t).
    Weierstrass {
        #[arg(long)]
        alpha: f64,
        /// Number of plotted points.
        #[arg(long = "N", default_value_t = 100_000)]
        points: usize,
        #[arg(long, default_value_t = WeierstrassParams::DEFAULT_GAMMA)]
        gamma: f64,
        /// Highest term index M.
        #[arg(long, default_value_t = WeierstrassParams::DEFAULT_TERMS)]
        terms: u32,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long, default_value_t = 1.5)]
        t_max: f64,
        #[arg(long, default_value = "2400x1800", value_parser = parse_canvas)]
        canvas: (usize, usize),
        #[arg(long, default_value_t = 0)]
        margin: usize,
        /// Anti-aliased (gray) strokes instead of binary ones.
        #[arg(long)]
        antialias: bool,
        /// Output path; format from the extension (.png, .pgm, .pbm).
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Pascal triangle mod 2, 2^order cells on a side.
    Sierpinski {
        #[arg(long)]
        order: u32,
        /// Pixels per cell side.
        #[arg(long, default_value_t = 1)]
        cell: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReferenceMethod {
    Box,
    Info,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "box")]
    pub method: ReferenceMethod,
    #[arg(long, default_value_t = fracdim::raster::DEFAULT_THRESHOLD)]
    pub threshold: u8,
    /// Box side lengths; defaults to powers of two up to a quarter of the short side.
    #[arg(long, value_delimiter = ',')]
    pub boxes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Desk,
    Paper,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "desk")]
    pub preset: Preset,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Plot densities.
    #[arg(long = "N", value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    /// Scale-prefix lengths.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<ScaleMode>,
    #[arg(long, value_parser = parse_codec)]
    pub codec: Option<Codec>,
    #[arg(long, value_parser = parse_canvas)]
    pub canvas: Option<(usize, usize)>,
    /// Directory for `bench_detail.csv` and `bench_summary.csv`.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

/// Parses arguments, runs one command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let outcome = thread_count().and_then(|n| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::input(format!("thread pool: {e}")))?;
        pool.install(|| execute(&cli))
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("fracdim: {e}");
            e.code
        }
    }
}

fn thread_count() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) if v.trim().is_empty() => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| CliError::input(format!("{THREADS_ENV}={v:?} is not a count"))),
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Reference(a) => cmd_reference(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn default_csv_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned());
    input.with_file_name(format!("{stem}.scaling.csv"))
}

fn range_label(policy: &RangePolicy) -> String {
    match policy {
        RangePolicy::Auto { .. } => "auto".to_string(),
        RangePolicy::Explicit(a, b) => format!("{a}:{b}"),
        RangePolicy::Prefix(n) => format!("ns={n}"),
    }
}

pub fn cmd_estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let raster = image_io::read_image(&a.input)?;
    let policy = a.range.policy(a.min_r2);
    let curve = sample_scaling_curve(&raster, &a.scales, a.mode, a.codec, a.threshold)?;
    let csv_path = a.csv.clone().unwrap_or_else(|| default_csv_path(&a.input));
    write_file(&csv_path, &report::curve_csv(&curve))?;

    let mut m = RunManifest::new("estimate");
    m.set("input", a.input.display())
        .set("source_width", raster.width())
        .set("source_height", raster.height())
        .set("scales", join_f64(&a.scales))
        .set("mode", a.mode.name())
        .set("codec", a.codec.name())
        .set("codec_level", a.codec.level())
        .set("threshold", a.threshold)
        .set("range_policy", range_label(&policy));
    match policy {
        RangePolicy::Auto { min_r2 } => m.set("min_r2", min_r2),
        RangePolicy::Prefix(n) => m.set("n_s", n),
        RangePolicy::Explicit(..) => &mut m,
    };

    let est = match estimate_from_curve(curve, &policy) {
        Ok(est) => est,
        Err(e) => {
            m.set("status", &e).set("scaling_csv", csv_path.display());
            m.write_for(&csv_path)?;
            return Err(e.into());
        }
    };
    let fit = &est.fit;
    let (first, last) = fit.used_range;
    m.set("status", "ok")
        .set("used_range", format!("{first}..{last}"))
        .set("n_points", fit.n_points)
        .set("dimension", fit.dimension)
        .set("intercept", fit.intercept)
        .set("residual_norm", fit.residual_norm)
        .set("r_squared", fit.r_squared)
        .set("scaling_csv", csv_path.display());
    if let Some(svg_path) = &a.svg {
        let title = a.input.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        write_file(svg_path, svg::render(&est.curve, fit, &title).as_bytes())?;
        m.set("svg", svg_path.display());
        m.write_for(svg_path)?;
    }
    m.write_for(&csv_path)?;
    println!(
        "D = {:.10}  (n_points={}, range={first}..{last}, residual_norm={:.10})",
        fit.dimension, fit.n_points, fit.residual_norm
    );
    Ok(())
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<(), CliError> {
    let (raster, output, mut m) = match &a.kind {
        GenerateKind::Weierstrass { alpha, points, gamma, terms, t_min, t_max, canvas, margin, antialias, output } => {
            let p = WeierstrassParams {
                alpha: *alpha,
                gamma: *gamma,
                terms: *terms,
                points: *points,
                t_min: *t_min,
                t_max: *t_max,
            };
            let style = if *antialias { LineStyle::AntiAliased } else { LineStyle::Binary };
            let line = sample_weierstrass(&p)?;
            let r = rasterize_polyline(&line, canvas.0, canvas.1, *margin, style)?;
            let mut m = RunManifest::new("generate weierstrass");
            m.set("alpha", alpha)
                .set("N", points)
                .set("gamma", gamma)
                .set("terms", terms)
                .set("t_min", t_min)
                .set("t_max", t_max)
                .set("canvas", format!("{}x{}", canvas.0, canvas.1))
                .set("margin", margin)
                .set("style", if *antialias { "antialiased" } else { "binary" })
                .set("true_dimension", p.true_dimension());
            (r, output, m)
        }
        GenerateKind::Sierpinski { order, cell, output } => {
            if *order > 14 || *cell == 0 || (*cell << order) > 1 << 15 {
                return Err(CliError::input("sierpinski: need order <= 14, cell >= 1 and side <= 32768"));
            }
            let mut m = RunManifest::new("generate sierpinski");
            m.set("order", order).set("cell", cell).set("true_dimension", 3f64.log2());
            (sierpinski_raster(*order, *cell), output, m)
        }
    };
    m.set("width", raster.width()).set("height", raster.height());
    image_io::write_image(&raster, output)?;
    m.write_for(output)?;
    println!("wrote {} ({}x{})", output.display(), raster.width(), raster.height());
    Ok(())
}

pub fn cmd_reference(a: &ReferenceArgs) -> Result<(), CliError> {
    let raster = image_io::read_image(&a.input)?;
    let boxes = a.boxes.clone().unwrap_or_else(|| default_box_sizes(raster.width(), raster.height()));
    let (label, fit) = match a.method {
        ReferenceMethod::Box => ("D_B", box_count_dimension(&raster, &boxes, a.threshold)?),
        ReferenceMethod::Info => ("D_I", information_dimension(&raster, &boxes, a.threshold)?),
    };
    println!(
        "{label} = {:.10}  (n_points={}, boxes={}, residual_norm={:.10})",
        fit.dimension,
        fit.n_points,
        join_usize(&boxes),
        fit.residual_norm
    );
    Ok(())
}

pub fn bench_config(a: &BenchArgs) -> BenchConfig {
    let base = match a.preset {
        Preset::Desk => BenchConfig::desk(),
        Preset::Paper => BenchConfig::paper(),
    };
    BenchConfig {
        alphas: a.alphas.clone().unwrap_or(base.alphas.clone()),
        n_grid: a.n_grid.clone().unwrap_or(base.n_grid.clone()),
        ns_grid: a.ns.clone().unwrap_or(base.ns_grid.clone()),
        mode: a.mode.unwrap_or(base.mode),
        codec: a.codec.unwrap_or(base.codec),
        canvas: a.canvas.unwrap_or(base.canvas),
        ..base
    }
}

pub const DETAIL_FILE: &str = "bench_detail.csv";
pub const SUMMARY_FILE: &str = "bench_summary.csv";

pub fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let cfg = bench_config(a);
    let report = run_bench(&cfg)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::input(format!("{}: {e}", a.out_dir.display())))?;
    let mut m = RunManifest::new("bench");
    m.set("preset", format!("{:?}", a.preset).to_lowercase())
        .set("alphas", join_f64(&cfg.alphas))
        .set("N", join_usize(&cfg.n_grid))
        .set("ns", join_usize(&cfg.ns_grid))
        .set("scales", join_f64(&cfg.percents))
        .set("mode", cfg.mode.name())
        .set("codec", cfg.codec.name())
        .set("codec_level", cfg.codec.level())
        .set("canvas", format!("{}x{}", cfg.canvas.0, cfg.canvas.1))
        .set("margin", cfg.margin)
        .set("gamma", cfg.gamma)
        .set("terms", cfg.terms)
        .set("threshold", cfg.threshold)
        .set("failed_cells", report.cells.iter().filter(|c| c.failed()).count());
    match report.best() {
        Some(b) => m.set("best_cell", format!("N={} ns={} UME={}", b.n_points, b.ns, report::num(b.ume))),
        None => m.set("best_cell", "none"),
    };
    for (name, bytes) in [
        (DETAIL_FILE, report::bench_detail_csv(&report)),
        (SUMMARY_FILE, report::bench_summary_csv(&report)),
    ] {
        let path = a.out_dir.join(name);
        write_file(&path, &bytes)?;
        m.write_for(&path)?;
    }
    match report.best() {
        Some(b) => println!(
            "best cell: N={} ns={} UME={:.6}  ({} cells, {} failed)",
            b.n_points,
            b.ns,
            b.ume.unwrap_or(f64::NAN),
            report.cells.len(),
            report.cells.iter().filter(|c| c.failed()).count()
        ),
        None => println!("no cell produced estimates for every alpha ({} cells)", report.cells.len()),
    }
    Ok(())
}
