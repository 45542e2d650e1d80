//! Argument grammar and subcommand dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gcmc_core::certificates::{search_certificate, verify_certificate, SearchConfig, SearchOutcome};
use gcmc_core::densities::{Density, GaussianMixture};
use gcmc_core::functionals::{capacity, epi_gap, laplace_forward, LaplaceMeasure, QuadratureConfig};
use gcmc_core::moments::{parse_rational, Calculus, DEFAULT_DERIVATIVE_CAP};
use gcmc_core::monotonicity::{
    flow_curve, log_convexity_check, scan_point, sign_table, sign_table_with_richardson, DerivativeTable, ScanConfig,
    ScanPoint, ScanReport,
};
use gcmc_core::rational::to_f64;
use gcmc_core::sequences::{
    chromatic_polynomial, evaluate_polynomial, mgl_curve, reciprocal_profile, sequence_profile, sequence_profile_exact,
    Graph, DEFAULT_EDGE_CAP,
};
use gcmc_core::Rational;
use num_traits::Signed;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, EXIT_INVALID, EXIT_OK, EXIT_VIOLATION};
use crate::formats;
use crate::plot::{self, PlotKind};
use crate::range::parse_range;
use crate::report::{self, Outcome};

/// Entropy-power gaps below this count as EPI violations.
pub const EPI_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "gcmc",
    version,
    about = "Heat-flow entropy derivatives, sum-of-squares certificates and complete-monotonicity scans",
    after_help = "Exit status: 0 success, 2 usage or validation error, 3 a recorded violation.\n\
                  Ranges: a value, start:stop:step, log:start:stop:count, or a comma-separated list of these."
)]
pub struct Cli {
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for the report file and plot CSVs; without it the report goes to stdout.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Omit the generation time so identical runs give byte-identical JSON.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Plot-data kinds to emit as `<kind>-<hash>.csv` (flow, heatmap, sign-table).
    #[arg(long, global = true, value_delimiter = ',', value_name = "KIND")]
    pub plot: Vec<String>,
    /// Also write `plot.py`, a matplotlib script reading the emitted CSVs.
    #[arg(long, global = true)]
    pub plot_script: bool,
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    /// Gauss-Hermite nodes per component.
    #[arg(long, global = true, value_name = "N")]
    pub points_per_component: Option<usize>,
    /// Density floor, relative to its maximum, below which integrands are dropped.
    #[arg(long, global = true, value_name = "EPS")]
    pub tail_cutoff: Option<f64>,
    /// Relative tolerance of the refinement test.
    #[arg(long, global = true, value_name = "TOL")]
    pub rel_tol: Option<f64>,
}

impl QuadratureArgs {
    fn config(&self) -> Result<QuadratureConfig, CliError> {
        let mut c = QuadratureConfig::default();
        if let Some(n) = self.points_per_component {
            c.points_per_component = n;
        }
        if let Some(e) = self.tail_cutoff {
            c.tail_cutoff_ratio = e;
        }
        if let Some(r) = self.rel_tol {
            c.relative_tolerance = r;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// dⁿh/dtⁿ.
    Entropy,
    /// dⁿI/dtⁿ.
    Fisher,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Notation {
    /// `-1/2*E[r2^2] + 1/6*E[r1^4]`.
    Canonical,
    /// f-notation integrals.
    Paper,
}

#[derive(Debug, Args)]
pub struct MixtureArg {
    /// Mixture file (`weight mean variance` per line); defaults to N(0,1).
    #[arg(long, value_name = "FILE")]
    pub mixture: Option<PathBuf>,
}

impl MixtureArg {
    fn load(&self) -> Result<GaussianMixture, CliError> {
        match &self.mixture {
            Some(p) => formats::load_mixture(p),
            None => Ok(GaussianMixture::gaussian(0.0, 1.0)?),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the canonical moment expression of a time derivative.
    Derive {
        /// Derivative order.
        #[arg(long)]
        order: u32,
        #[arg(long, value_enum, default_value = "entropy")]
        quantity: Quantity,
        #[arg(long, value_enum, default_value = "canonical")]
        notation: Notation,
        /// Highest entropy derivative order the calculus will build.
        #[arg(long, default_value_t = DEFAULT_DERIVATIVE_CAP)]
        cap: u32,
    },
    /// Verify a sum-of-squares certificate exactly.
    Certify {
        /// `builtin:paper-n2|paper-n3|paper-n4` or a certificate file.
        #[arg(long, value_name = "SOURCE")]
        certificate: String,
        /// Expected order; rejected when it differs from the certificate's.
        #[arg(long)]
        order: Option<u32>,
        #[arg(long, value_enum, default_value = "canonical")]
        notation: Notation,
    },
    /// Search numerically for a certificate and finish it in exact arithmetic.
    Search {
        #[arg(long)]
        order: u32,
        /// Seed of the first restart; restart k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        restarts: u64,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Number of square polynomials.
        #[arg(long)]
        squares: Option<usize>,
        #[arg(long)]
        max_denominator: Option<u64>,
    },
    /// Entropy, Fisher information and its derivatives along the heat flow.
    Flow {
        #[command(flatten)]
        mixture: MixtureArg,
        #[arg(long, default_value = "log:0.1:10:25", value_name = "RANGE")]
        t: String,
        #[arg(long, default_value_t = 4)]
        max_order: u32,
        /// Add the Richardson finite-difference column for orders 1 to 4.
        #[arg(long)]
        richardson: bool,
    },
    /// Sweep the two-point family λN(0,1) + (1−λ)N(d,1) for sign violations.
    Scan {
        #[arg(long, default_value = "0.05:0.5:0.05", value_name = "RANGE")]
        lambda: String,
        #[arg(long, default_value = "0.5:20:0.5", value_name = "RANGE")]
        d: String,
        #[arg(long, default_value = "log:0.01:10:40", value_name = "RANGE")]
        t: String,
        #[arg(long, default_value_t = 7)]
        max_order: u32,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Skip the log-convexity checks.
        #[arg(long)]
        no_log_convexity: bool,
        /// Negate the expression of one order (fault injection).
        #[arg(long, value_name = "ORDER")]
        corrupt_order: Option<u32>,
    },
    /// Function- and sequence-level log-convexity of I along the flow.
    Logconvex {
        #[command(flatten)]
        mixture: MixtureArg,
        #[arg(long, default_value = "log:0.01:10:40", value_name = "RANGE")]
        t: String,
        #[arg(long, default_value_t = 7)]
        max_order: u32,
    },
    /// Entropy-power inequality gap of two densities.
    Epi {
        /// First density: mixture file, or grid CSV `y,f` by `.csv` extension.
        #[arg(long, value_name = "FILE")]
        a: PathBuf,
        /// Second density.
        #[arg(long, value_name = "FILE")]
        b: PathBuf,
    },
    /// Gaussian channel capacity ½ ln(1 + P/t).
    Capacity {
        #[arg(long)]
        power: f64,
        #[arg(long, value_name = "RANGE")]
        noise: String,
    },
    /// Laplace transform ∫ e^{−xt} dμ(x) of a sampled measure.
    Laplace {
        /// Use μ'(x) = e^{−ax}.
        #[arg(long, value_name = "A", conflicts_with = "measure")]
        rate: Option<f64>,
        /// Measure density as CSV `x,density` on a uniform grid from 0.
        #[arg(long, value_name = "FILE")]
        measure: Option<PathBuf>,
        /// Point mass at x = 0.
        #[arg(long, default_value_t = 0.0)]
        atom: f64,
        #[arg(long, default_value = "0.5,1,5", value_name = "RANGE")]
        t: String,
        /// Sample spacing for `--rate`.
        #[arg(long, default_value_t = 1e-3)]
        spacing: f64,
    },
    /// Mrs. Gerber's Lemma: convexity of x ↦ H(p ∗ H⁻¹(x)).
    Mgl {
        #[arg(long, default_value = "0:0.5:0.05", value_name = "RANGE")]
        p: String,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Chromatic polynomial and log-concavity of its coefficients.
    Chromatic {
        /// Edge-list file: vertex count, then `u v` per line.
        #[arg(long, value_name = "FILE", group = "source")]
        graph: Option<PathBuf>,
        #[arg(long, value_name = "N", group = "source")]
        complete: Option<usize>,
        #[arg(long, value_name = "N", group = "source")]
        cycle: Option<usize>,
        #[arg(long, value_name = "N", group = "source")]
        path: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_EDGE_CAP)]
        edge_cap: usize,
    },
    /// Log-concavity and log-convexity of a sequence and of its reciprocals.
    Seq {
        /// Values separated by commas or spaces.
        #[arg(long, value_name = "LIST", group = "input")]
        values: Option<String>,
        #[arg(long, value_name = "FILE", group = "input")]
        file: Option<PathBuf>,
        /// Parse values as exact rationals such as `1/3`.
        #[arg(long)]
        exact: bool,
    },
}

/// Parse, run and write outputs; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gcmc: {e}");
            EXIT_INVALID
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let quad = cli.quadrature.config()?;
    let requested: Vec<PlotKind> = cli.output.plot.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let outcome = dispatch(&cli.command, &quad, &requested)?;
    let missing: Vec<_> = requested.iter().filter(|k| !outcome.plots.iter().any(|(p, _)| p == *k)).collect();
    if let Some(k) = missing.first() {
        return Err(CliError::Validation(format!("plot kind `{k}` is not available for `{}`", outcome.command)));
    }
    if cli.output.format == Format::Csv && outcome.csv.is_none() {
        return Err(CliError::Validation(format!("`{}` has no CSV report; use text or json", outcome.command)));
    }
    write_outputs(cli, &outcome)?;
    Ok(if outcome.violation { EXIT_VIOLATION } else { EXIT_OK })
}

fn write_outputs(cli: &Cli, o: &Outcome) -> Result<(), CliError> {
    let stamp = !cli.output.no_timestamp;
    let body = match cli.output.format {
        Format::Text => o.text.clone(),
        Format::Json => o.json_text(stamp),
        Format::Csv => o.csv.clone().unwrap_or_default(),
    };
    match &cli.output.out_dir {
        Some(dir) => {
            let ext = match cli.output.format {
                Format::Text => "txt",
                Format::Json => "json",
                Format::Csv => "csv",
            };
            report::write_atomic(&dir.join(format!("{}.{ext}", o.command)), body.as_bytes())?;
            print!("{}", o.text);
        }
        None => print!("{body}"),
    }
    if !o.plots.is_empty() {
        let dir = cli.output.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        let mut written = Vec::new();
        for (kind, csv) in &o.plots {
            let path = plot::emit(&dir, *kind, csv)?;
            eprintln!("wrote {}", path.display());
            written.push((*kind, plot::file_name(*kind, csv)));
        }
        if cli.output.plot_script {
            report::write_atomic(&dir.join("plot.py"), plot::script(&written).as_bytes())?;
        }
    }
    Ok(())
}

fn dispatch(cmd: &Command, quad: &QuadratureConfig, plots: &[PlotKind]) -> Result<Outcome, CliError> {
    match cmd {
        Command::Derive { order, quantity, notation, cap } => derive(*order, *quantity, *notation, *cap),
        Command::Certify { certificate, order, notation } => certify(certificate, *order, *notation),
        Command::Search { order, seed, restarts, max_iterations, squares, max_denominator } => {
            let mut cfg = SearchConfig::new(*order);
            if let Some(n) = max_iterations {
                cfg.max_iterations = *n;
            }
            cfg.squares = *squares;
            if let Some(d) = max_denominator {
                cfg.max_denominator = *d;
            }
            search(cfg, *seed, *restarts)
        }
        Command::Flow { mixture, t, max_order, richardson } => {
            flow(&mixture.load()?, &ts(t)?, *max_order, *richardson, quad, plots)
        }
        Command::Scan { lambda, d, t, max_order, jobs, no_log_convexity, corrupt_order } => {
            let cfg = ScanConfig {
                lambdas: range(lambda)?,
                ds: range(d)?,
                ts: ts(t)?,
                max_order: *max_order,
                quadrature: quad.clone(),
                check_log_convexity: !no_log_convexity,
            };
            scan(cfg, *jobs, *corrupt_order, plots)
        }
        Command::Logconvex { mixture, t, max_order } => logconvex(&mixture.load()?, &ts(t)?, *max_order, quad),
        Command::Epi { a, b } => epi(a, b, quad),
        Command::Capacity { power, noise } => capacity_cmd(*power, &range(noise)?),
        Command::Laplace { rate, measure, atom, t, spacing } => {
            laplace(*rate, measure.as_deref(), *atom, &ts(t)?, *spacing)
        }
        Command::Mgl { p, points } => mgl(&range(p)?, *points),
        Command::Chromatic { graph, complete, cycle, path, edge_cap } => {
            let g = match (graph, complete, cycle, path) {
                (Some(p), ..) => formats::load_graph(p)?,
                (_, Some(n), ..) => Graph::complete(*n)?,
                (_, _, Some(n), _) => Graph::cycle(*n)?,
                (.., Some(n)) => Graph::path(*n)?,
                _ => return Err(CliError::Usage("chromatic needs --graph, --complete, --cycle or --path".into())),
            };
            chromatic(&g, *edge_cap)
        }
        Command::Seq { values, file, exact } => {
            let text = match (values, file) {
                (Some(v), _) => v.clone(),
                (_, Some(p)) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?,
                _ => return Err(CliError::Usage("seq needs --values or --file".into())),
            };
            seq(&formats::parse_values(&text)?, *exact)
        }
    }
}

fn range(s: &str) -> Result<Vec<f64>, CliError> {
    parse_range(s).map_err(CliError::Validation)
}

fn ts(s: &str) -> Result<Vec<f64>, CliError> {
    let v = range(s)?;
    if let Some(t) = v.iter().find(|t| !(**t > 0.0)) {
        return Err(CliError::Validation(format!("times must be positive, got {t}")));
    }
    Ok(v)
}

fn derive(order: u32, quantity: Quantity, notation: Notation, cap: u32) -> Result<Outcome, CliError> {
    let mut calc = Calculus::new(cap);
    let (e, label) = match quantity {
        Quantity::Entropy => (calc.entropy_derivative(order)?, format!("d^{order} h/dt^{order}")),
        Quantity::Fisher => (calc.fisher_derivative(order)?, format!("d^{order} I/dt^{order}")),
    };
    let canonical = e.to_string();
    let paper = e.to_paper_notation();
    let shown = match notation {
        Notation::Canonical => &canonical,
        Notation::Paper => &paper,
    };
    let text = format!("{label} = {shown}\n");
    let results = json!({
        "expression": canonical,
        "paperNotation": paper,
        "terms": e.len(),
        "weight": e.homogeneous_weight(),
    });
    let config = json!({"order": order, "quantity": format!("{quantity:?}").to_lowercase(), "cap": cap});
    Ok(Outcome::new("derive", text, config, results))
}

fn certify(source: &str, order: Option<u32>, notation: Notation) -> Result<Outcome, CliError> {
    let c = formats::load_certificate(source)?;
    if let Some(n) = order {
        if n != c.order {
            return Err(CliError::Validation(format!("certificate has order {}, expected {n}", c.order)));
        }
    }
    let mut calc = Calculus::new(DEFAULT_DERIVATIVE_CAP.max(c.order));
    let r = verify_certificate(&c, &mut calc)?;
    let mut text = format!("order: {}\nsign: {}\nverified: {}\n", c.order, c.sign.as_i32(), r.verified);
    if !r.verified {
        let _ = writeln!(text, "residual: {}", r.residual);
    }
    match notation {
        Notation::Paper => {
            let _ = writeln!(text, "certificate: {}", c.to_paper_notation());
        }
        Notation::Canonical => text.push_str(&c.to_string()),
    }
    let results = json!({
        "verified": r.verified,
        "residual": r.residual.to_string(),
        "residualL1": r.residual_norm_l1.to_string(),
        "certificate": c.to_string(),
        "paperNotation": c.to_paper_notation(),
    });
    let mut o = Outcome::new("certify", text, json!({"source": source, "order": c.order}), results);
    o.violation = !r.verified;
    Ok(o)
}

fn search(base: SearchConfig, seed: u64, restarts: u64) -> Result<Outcome, CliError> {
    if restarts == 0 {
        return Err(CliError::Validation("restarts must be positive".into()));
    }
    let mut calc = Calculus::new(DEFAULT_DERIVATIVE_CAP.max(base.order));
    let mut runs = Vec::new();
    let mut text = String::new();
    let mut first = None;
    for k in 0..restarts {
        let cfg = base.clone().with_seed(seed.wrapping_add(k));
        let out = search_certificate(&cfg, &mut calc)?;
        let s = out.stats();
        let _ = writeln!(
            text,
            "seed {}: {} after {} iterations (residual {:.3e})",
            cfg.seed,
            if out.is_certified() { "certified" } else { "not certified" },
            s.iterations,
            s.residual_l2
        );
        let cert = match &out {
            SearchOutcome::Certified { certificate, .. } => Some(certificate.to_string()),
            SearchOutcome::Unconverged { .. } => None,
        };
        if first.is_none() {
            first = cert.clone();
        }
        runs.push(json!({
            "seed": cfg.seed,
            "certified": out.is_certified(),
            "iterations": s.iterations,
            "residualL2": s.residual_l2,
            "maxDenominatorUsed": s.max_denominator_used,
            "certificate": cert,
        }));
    }
    let certified = runs.iter().filter(|r| r["certified"] == true).count();
    let _ = writeln!(text, "certified: {certified}/{restarts}");
    if let Some(c) = &first {
        text.push_str(c);
    }
    let config = json!({
        "order": base.order,
        "seed": seed,
        "restarts": restarts,
        "maxIterations": base.max_iterations,
        "squares": base.squares,
        "maxDenominator": base.max_denominator,
    });
    Ok(Outcome::new("search", text, config, json!({"certified": certified, "runs": runs})))
}

fn mixture_json(m: &GaussianMixture) -> Value {
    Value::Array(m.components().iter().map(|c| json!([c.weight, c.mean, c.variance])).collect())
}

fn table(max_order: u32) -> Result<DerivativeTable, CliError> {
    let mut calc = Calculus::new(DEFAULT_DERIVATIVE_CAP.max(max_order + 1));
    Ok(DerivativeTable::new(max_order, &mut calc)?)
}

fn flow(
    m: &GaussianMixture,
    times: &[f64],
    max_order: u32,
    richardson: bool,
    quad: &QuadratureConfig,
    plots: &[PlotKind],
) -> Result<Outcome, CliError> {
    let table = table(max_order)?;
    let points = flow_curve(m, times, &table, quad)?;
    let signs = times
        .iter()
        .map(|&t| if richardson { sign_table_with_richardson(m, t, &table, quad) } else { sign_table(m, t, &table, quad) })
        .collect::<Result<Vec<_>, _>>()?;
    let violations: usize = signs.iter().map(|r| r.violations().count()).sum();
    let flagged: usize = signs.iter().map(|r| r.flagged()).sum();
    let mut text = String::from("t\th\tI");
    for n in 1..=max_order {
        let _ = write!(text, "\tdI{n}");
    }
    text.push('\n');
    for p in &points {
        let _ = write!(text, "{:.6}\t{:.9}\t{:.9e}", p.t, p.entropy, p.fisher);
        for d in &p.derivatives {
            let _ = write!(text, "\t{d:.6e}");
        }
        text.push('\n');
    }
    let _ = writeln!(text, "sign violations: {violations}\nflagged entries: {flagged}");
    let results = json!({
        "points": points.iter().map(|p| json!({
            "t": p.t, "h": p.entropy, "I": p.fisher, "derivatives": p.derivatives, "converged": p.converged,
        })).collect::<Vec<_>>(),
        "signTables": signs.iter().map(report::sign_report_json).collect::<Vec<_>>(),
        "violations": violations,
        "flagged": flagged,
    });
    let config = json!({"mixture": mixture_json(m), "t": times, "maxOrder": max_order, "richardson": richardson});
    let mut o = Outcome::new("flow", text, config, results);
    o.csv = Some(report::sign_reports_csv(&signs));
    for kind in plots {
        match kind {
            PlotKind::Flow => o.plots.push((*kind, plot::flow_csv(&points))),
            PlotKind::SignTable => o.plots.push((*kind, plot::sign_table_csv(&signs))),
            PlotKind::Heatmap => {}
        }
    }
    o.violation = violations > 0;
    Ok(o)
}

/// Runs [`scan_point`] over the grid on `jobs` threads and merges in enumeration order.
pub fn parallel_scan(cfg: &ScanConfig, table: &DerivativeTable, jobs: usize) -> Result<ScanReport, CliError> {
    cfg.validate()?;
    if table.max_order() < cfg.max_order {
        return Err(CliError::Validation("derivative table shorter than the scan's max order".into()));
    }
    let grid: Vec<(f64, f64, f64)> = cfg.points().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {jobs} workers: {e}")))?;
    let points: Vec<ScanPoint> = pool.install(|| {
        grid.par_iter().map(|&(l, d, t)| scan_point(table, cfg, l, d, t)).collect::<Result<Vec<_>, _>>()
    })?;
    Ok(ScanReport::assemble(cfg.clone(), points))
}

fn scan(cfg: ScanConfig, jobs: usize, corrupt: Option<u32>, plots: &[PlotKind]) -> Result<Outcome, CliError> {
    let mut t = table(cfg.max_order)?;
    if let Some(n) = corrupt {
        if n > cfg.max_order {
            return Err(CliError::Validation(format!("corrupt order {n} exceeds max order {}", cfg.max_order)));
        }
        t = t.corrupted(n);
    }
    let r = parallel_scan(&cfg, &t, jobs)?;
    let s = &r.summary;
    let mut text = format!(
        "points: {}\nentries: {}\nsign violations: {}\nlog-convexity violations: {} of {} checked\nunconverged: {}\nunresolved: {}\nzero band: {}\n",
        s.points,
        s.entries,
        s.violations,
        s.log_convexity_violations,
        s.log_convexity_checked,
        s.unconverged,
        s.unresolved,
        s.zero_band
    );
    let min_margin = r.heatmap.iter().map(|c| c.min_margin).fold(f64::INFINITY, f64::min);
    let _ = writeln!(text, "min normalized margin: {min_margin:.3e}");
    for v in r.violations.iter().take(20) {
        let _ = writeln!(text, "violation: lambda={} d={} t={} order={} value={:e}", v.lambda, v.d, v.t, v.order, v.value);
    }
    let config = json!({
        "lambda": cfg.lambdas,
        "d": cfg.ds,
        "t": cfg.ts,
        "maxOrder": cfg.max_order,
        "logConvexity": cfg.check_log_convexity,
        "corruptOrder": corrupt,
        "quadrature": {
            "pointsPerComponent": cfg.quadrature.points_per_component,
            "tailCutoffRatio": cfg.quadrature.tail_cutoff_ratio,
            "relativeTolerance": cfg.quadrature.relative_tolerance,
        },
    });
    let mut o = Outcome::new("scan", text, config, report::scan_json(&r));
    o.csv = Some(report::scan_csv(&r));
    if plots.contains(&PlotKind::Heatmap) {
        o.plots.push((PlotKind::Heatmap, plot::heatmap_csv(&r.heatmap)));
    }
    o.violation = r.has_violations();
    Ok(o)
}

fn logconvex(m: &GaussianMixture, times: &[f64], max_order: u32, quad: &QuadratureConfig) -> Result<Outcome, CliError> {
    let table = table(max_order)?;
    let reports = times.iter().map(|&t| log_convexity_check(m, t, &table, quad)).collect::<Result<Vec<_>, _>>()?;
    let failing: Vec<_> = reports.iter().filter(|r| r.converged && !r.holds()).collect();
    let unconverged = reports.iter().filter(|r| !r.converged).count();
    let mut text = String::from("t\tI*I''-I'^2\tmin sequence margin\tholds\n");
    for r in &reports {
        let worst = r.sequence_margins.iter().cloned().fold(f64::INFINITY, f64::min);
        let _ = writeln!(text, "{:.6}\t{:.6e}\t{:.6e}\t{}", r.t, r.function_margin, worst, r.holds());
    }
    let _ = writeln!(text, "violations: {}\nunconverged: {unconverged}", failing.len());
    let results = json!({
        "reports": reports.iter().map(|r| json!({
            "t": r.t,
            "functionMargin": r.function_margin,
            "functionOk": r.function_ok,
            "sequenceMargins": r.sequence_margins,
            "sequenceOk": r.sequence_ok,
            "converged": r.converged,
        })).collect::<Vec<_>>(),
        "violations": failing.len(),
        "unconverged": unconverged,
    });
    let config = json!({"mixture": mixture_json(m), "t": times, "maxOrder": max_order});
    let mut o = Outcome::new("logconvex", text, config, results);
    o.violation = !failing.is_empty();
    Ok(o)
}

fn epi(a: &Path, b: &Path, quad: &QuadratureConfig) -> Result<Outcome, CliError> {
    let (da, db): (Density, Density) = (formats::load_density(a)?, formats::load_density(b)?);
    let g = epi_gap(&da, &db, quad)?;
    let holds = g.gap >= -EPI_TOLERANCE * g.power_sum.max(1.0);
    let text = format!(
        "N(a) = {:.12e}\nN(b) = {:.12e}\nN(a*b) = {:.12e}\ngap = {:.6e}\nconverged: {}\nholds: {holds}\n",
        g.power_a, g.power_b, g.power_sum, g.gap, g.converged
    );
    let results = json!({
        "gap": g.gap,
        "powerA": g.power_a,
        "powerB": g.power_b,
        "powerSum": g.power_sum,
        "converged": g.converged,
        "holds": holds,
    });
    let config = json!({"a": a.display().to_string(), "b": b.display().to_string(), "tolerance": EPI_TOLERANCE});
    let mut o = Outcome::new("epi", text, config, results);
    o.violation = !holds;
    Ok(o)
}

fn capacity_cmd(power: f64, noise: &[f64]) -> Result<Outcome, CliError> {
    let mut text = String::from("t\tnats\tbits\n");
    let mut rows = Vec::new();
    for &t in noise {
        let c = capacity(power, t)?;
        let _ = writeln!(text, "{t}\t{c:.12}\t{:.12}", c / std::f64::consts::LN_2);
        rows.push(json!({"t": t, "nats": c, "bits": c / std::f64::consts::LN_2}));
    }
    Ok(Outcome::new("capacity", text, json!({"power": power, "noise": noise}), json!({"capacity": rows})))
}

/// Upper end of the sampled exponential measure: where e^{−ax} falls below 1e−18.
const EXP_SPAN: f64 = 41.5;

fn laplace(rate: Option<f64>, measure: Option<&Path>, atom: f64, times: &[f64], spacing: f64) -> Result<Outcome, CliError> {
    let (mu, exact_rate) = match (rate, measure) {
        (Some(a), _) => {
            if !(a > 0.0 && a.is_finite()) || !(spacing > 0.0) {
                return Err(CliError::Validation("rate and spacing must be positive".into()));
            }
            (LaplaceMeasure::from_fn(spacing, EXP_SPAN / a, atom, |x| (-a * x).exp()), Some(a))
        }
        (_, Some(p)) => {
            let g = formats::parse_grid(&std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
            if g.origin().abs() > 1e-12 {
                return Err(CliError::Validation("measure grid must start at x = 0".into()));
            }
            (LaplaceMeasure { spacing: g.spacing(), density: raw_measure(p)?, atom_at_zero: atom }, None)
        }
        _ => return Err(CliError::Usage("laplace needs --rate or --measure".into())),
    };
    let mut text = String::from("t\tvalue\tconverged");
    if exact_rate.is_some() {
        text.push_str("\t1/(t+a)\terror");
    }
    text.push('\n');
    let mut rows = Vec::new();
    for &t in times {
        let e = laplace_forward(&mu, t)?;
        let _ = write!(text, "{t}\t{:.12e}\t{}", e.value, e.converged);
        let exact = exact_rate.map(|a| atom + 1.0 / (t + a));
        if let Some(x) = exact {
            let _ = write!(text, "\t{x:.12e}\t{:.3e}", (e.value - x).abs());
        }
        text.push('\n');
        rows.push(json!({"t": t, "value": e.value, "converged": e.converged, "cutoffMass": e.cutoff_mass, "exact": exact}));
    }
    let config = json!({"rate": rate, "measure": measure.map(|p| p.display().to_string()), "atom": atom, "t": times, "spacing": mu.spacing});
    Ok(Outcome::new("laplace", text, config, json!({"values": rows})))
}

/// Measure file values as given, without the probability normalization grids receive.
fn raw_measure(p: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    let mut out = Vec::new();
    for l in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()) {
        if let Some((_, v)) = l.split_once(',') {
            if let Ok(v) = v.trim().parse::<f64>() {
                out.push(v);
            }
        }
    }
    Ok(out)
}

fn mgl(ps: &[f64], points: usize) -> Result<Outcome, CliError> {
    let mut text = String::from("p\tmin second difference\tconvex\n");
    let mut rows = Vec::new();
    let mut bad = 0;
    for &p in ps {
        let r = mgl_curve(p, points)?;
        bad += usize::from(!r.convex);
        let _ = writeln!(text, "{p}\t{:.6e}\t{}", r.min_second_difference, r.convex);
        rows.push(json!({"p": p, "minSecondDifference": r.min_second_difference, "argmin": r.argmin, "convex": r.convex}));
    }
    let _ = writeln!(text, "non-convex: {bad}");
    let mut o = Outcome::new("mgl", text, json!({"p": ps, "points": points}), json!({"curves": rows, "nonConvex": bad}));
    o.violation = bad > 0;
    Ok(o)
}

fn chromatic(g: &Graph, cap: usize) -> Result<Outcome, CliError> {
    let p = chromatic_polynomial(g, cap)?;
    let abs: Vec<f64> = p.iter().skip_while(|c| **c == 0).map(|c| c.unsigned_abs() as f64).collect();
    let profile = sequence_profile(&abs);
    let values: Vec<i128> = (0..=5).map(|q| evaluate_polynomial(&p, q)).collect();
    let text = format!(
        "vertices: {}\nedges: {}\ncoefficients (ascending powers): {:?}\nchi(0..5): {:?}\n|coefficients| log-concave: {}\n",
        g.vertex_count(),
        g.edge_count(),
        p,
        values,
        profile.log_concave
    );
    let results = json!({
        "coefficients": p,
        "values": values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "logConcave": profile.log_concave,
        "margins": profile.margins,
    });
    let config = json!({"graph": formats::format_graph(g), "edgeCap": cap});
    let mut o = Outcome::new("chromatic", text, config, results);
    o.violation = !profile.log_concave;
    Ok(o)
}

fn seq(values: &[String], exact: bool) -> Result<Outcome, CliError> {
    let (text, results, violation) = if exact {
        let qs = values.iter().map(|v| parse_rational(v)).collect::<Result<Vec<Rational>, _>>()?;
        if qs.iter().any(|q| !q.is_positive()) {
            return Err(CliError::Validation("exact sequences must be positive".into()));
        }
        let s = sequence_profile_exact(&qs);
        let inv: Vec<Rational> = qs.iter().map(|q| q.recip()).collect();
        let r = sequence_profile_exact(&inv);
        let implication = !s.log_convex || r.log_concave;
        let text = format!(
            "log-concave: {}\nlog-convex: {}\nreciprocals log-concave: {}\nreciprocals log-convex: {}\n",
            s.log_concave, s.log_convex, r.log_concave, r.log_convex
        );
        let results = json!({
            "logConcave": s.log_concave,
            "logConvex": s.log_convex,
            "margins": s.margins.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
            "marginsApprox": s.margins.iter().map(to_f64).collect::<Vec<_>>(),
            "reciprocalsLogConcave": r.log_concave,
            "reciprocalsLogConvex": r.log_convex,
            "implicationHolds": implication,
        });
        (text, results, !implication)
    } else {
        let xs = values
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| CliError::Validation(format!("`{v}` is not a number"))))
            .collect::<Result<Vec<_>, _>>()?;
        let r = reciprocal_profile(&xs)?;
        let text = format!(
            "log-concave: {}\nlog-convex: {}\nreciprocals log-concave: {}\nreciprocals log-convex: {}\n",
            r.sequence.log_concave, r.sequence.log_convex, r.reciprocals.log_concave, r.reciprocals.log_convex
        );
        let results = json!({
            "logConcave": r.sequence.log_concave,
            "logConvex": r.sequence.log_convex,
            "margins": r.sequence.margins,
            "reciprocalsLogConcave": r.reciprocals.log_concave,
            "reciprocalsLogConvex": r.reciprocals.log_convex,
            "implicationHolds": r.implication_holds,
        });
        (text, results, !r.implication_holds)
    };
    let mut o = Outcome::new("seq", text, json!({"values": values, "exact": exact}), results);
    o.violation = violation;
    Ok(o)
}
