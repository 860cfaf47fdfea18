use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use slicelip_core::io::{self, Format, ReportDocument};
use slicelip_core::lipschitz::{self, DerivativeMode};
use slicelip_core::majorant::{check_regular, LogGrid, Majorant, DEFAULT_QUAD_NODES};
use slicelip_core::verify::{self, Corpus, CorpusSource, RunConfig, Suite};
use slicelip_core::{ImaginaryUnit, Quaternion, SliceSeries};

/// Optional path of a run config used as the base for every command.
const CONFIG_ENV: &str = "SLICELIP_CONFIG";

#[derive(Parser)]
#[command(name = "slicelip", version, about = "Slice regular functions on the quaternionic unit ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate corpus functions at points.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Point `x0,x1,x2,x3`; repeatable.
        #[arg(long = "at", required = true, value_parser = parse_quaternion)]
        at: Vec<Quaternion>,
    },
    /// Star product or star inverse of corpus functions, written as a function spec.
    Star {
        #[command(flatten)]
        run: RunArgs,
        /// Left factor, or the function to invert.
        #[arg(long)]
        left: String,
        /// Right factor; omit together with `--inverse`.
        #[arg(long)]
        right: Option<String>,
        /// Truncation degree of the star inverse.
        #[arg(long)]
        inverse: Option<usize>,
        #[arg(long, default_value = "result")]
        name: String,
    },
    /// Regularity certificate of a majorant; exits 1 when it is not regular.
    MajorantCheck {
        #[arg(long, default_value = "power:0.5", value_parser = parse_majorant)]
        omega: Majorant,
        #[arg(long, default_value_t = 1e-6)]
        x_min: f64,
        #[arg(long = "grid-points", default_value_t = 200)]
        grid_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate a norm or derivative functional for every corpus member.
    Norm {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "slice")]
        estimator: Estimator,
    },
    /// Run verification suites; exits 0 iff every suite passes.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Re-emit a saved report document; exits 0 iff every suite passed.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Slice,
    Component,
    Global,
    Boundary,
    Derivative,
    DerivativePlus,
    DerivativeMinus,
    GlobalDerivative,
}

#[derive(Args)]
struct RunArgs {
    /// Run config (or saved report) to start from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Function spec file; the built-in corpus when absent.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    nodes: Option<usize>,
    /// `i=x,y,z` sets the slice, `k=x,y,z` the second slice; normalized.
    #[arg(long, value_parser = parse_slice)]
    slice: Vec<(char, ImaginaryUnit)>,
    /// `power:alpha[:scale]` or a JSON majorant.
    #[arg(long, value_parser = parse_majorant)]
    omega: Option<Majorant>,
    #[arg(long, value_parser = parse_majorant)]
    omega1: Option<Majorant>,
    #[arg(long, value_parser = parse_majorant)]
    omega2: Option<Majorant>,
    /// Comma-separated suite names.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<Suite>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        let base = match (&self.config, std::env::var_os(CONFIG_ENV)) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(p)) if !p.is_empty() => Some(PathBuf::from(p)),
            _ => None,
        };
        let mut cfg = match base {
            Some(p) => io::load_config(&p).with_context(|| format!("loading config {}", p.display()))?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.corpus {
            cfg.corpus = CorpusSource::File(p.clone());
        }
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*};
        }
        set!(seed, pairs, points, epsilon, rho, nodes, omega, omega1, omega2);
        for (name, unit) in &self.slice {
            match name {
                'i' => cfg.slice = *unit,
                _ => cfg.other_slice = *unit,
            }
        }
        if !self.suite.is_empty() {
            cfg.suites = self.suite.clone();
        }
        cfg.plan().validate()?;
        Ok(cfg)
    }
}

fn parse_numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} numbers, got {}", v.len()))
}

fn parse_quaternion(s: &str) -> Result<Quaternion, String> {
    parse_numbers::<4>(s).map(Quaternion::from)
}

fn parse_slice(s: &str) -> Result<(char, ImaginaryUnit), String> {
    let (name, rest) = s.split_once('=').ok_or("expected `i=x,y,z` or `k=x,y,z`")?;
    let name = match name.trim() {
        "i" => 'i',
        "k" => 'k',
        other => return Err(format!("unknown slice `{other}`, expected `i` or `k`")),
    };
    let [x, y, z] = parse_numbers::<3>(rest)?;
    ImaginaryUnit::normalized(x, y, z).map(|u| (name, u)).map_err(|e| e.to_string())
}

fn parse_majorant(s: &str) -> Result<Majorant, String> {
    if s.trim_start().starts_with('{') {
        let w: Majorant = serde_json::from_str(s).map_err(|e| e.to_string())?;
        return Ok(w);
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    let w = match parts.as_slice() {
        ["power", a] => Majorant::Power { alpha: num(a)?, scale: 1.0 },
        ["power", a, c] => Majorant::Power { alpha: num(a)?, scale: num(c)? },
        _ => return Err(format!("unrecognized majorant `{s}`, expected `power:alpha[:scale]` or JSON")),
    };
    w.validate().map_err(|e| e.to_string())?;
    Ok(w)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn find<'a>(corpus: &'a Corpus, name: &str) -> Result<&'a SliceSeries> {
    match corpus.members().iter().find(|m| m.name == name) {
        Some(m) => Ok(&m.series),
        None => bail!("no function named `{name}` in the corpus"),
    }
}

#[derive(Serialize)]
struct Evaluation {
    function: String,
    point: Quaternion,
    value: Quaternion,
}

#[derive(Serialize)]
struct Estimate {
    function: String,
    #[serde(flatten)]
    estimate: Option<lipschitz::NormEstimate>,
    error: Option<String>,
}

fn emit(doc: &ReportDocument, out: Option<&Path>, format: FormatArg) -> Result<bool> {
    match out {
        Some(p) => Ok(io::emit_report(doc, p, format.into())?),
        None => {
            match format {
                FormatArg::Json => print!("{}", io::report_json(doc)),
                FormatArg::Csv => print!("{}", io::report_csv(doc)?),
            }
            Ok(doc.all_pass())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Eval { run, at } => {
            let cfg = run.config()?;
            let corpus = cfg.load_corpus()?;
            let rows: Vec<Evaluation> = corpus
                .members()
                .iter()
                .flat_map(|m| {
                    at.iter().map(|&p| Evaluation { function: m.name.clone(), point: p, value: m.series.evaluate(p) })
                })
                .collect();
            write_output(run.out.as_deref(), &json(&rows))?;
            Ok(true)
        }
        Command::Star { run, left, right, inverse, name } => {
            let corpus = run.config()?.load_corpus()?;
            let f = find(&corpus, &left)?;
            let series = match (right, inverse) {
                (Some(r), None) => f.star_product(find(&corpus, &r)?),
                (None, Some(m)) => f.star_inverse(m)?,
                _ => bail!("give exactly one of --right and --inverse"),
            };
            let result = Corpus::new(vec![verify::CorpusMember { name, series }]);
            let mut text = io::function_spec_json(&result);
            text.push('\n');
            write_output(run.out.as_deref(), &text)?;
            Ok(true)
        }
        Command::MajorantCheck { omega, x_min, grid_points, out } => {
            let cert = check_regular(&omega, &LogGrid { x_min, points: grid_points }, DEFAULT_QUAD_NODES)?;
            write_output(out.as_deref(), &json(&cert))?;
            Ok(cert.is_regular)
        }
        Command::Norm { run, estimator } => {
            let cfg = run.config()?;
            let corpus = cfg.load_corpus()?;
            let plan = cfg.plan();
            let (w, i) = (&cfg.omega, cfg.slice);
            let rows: Vec<Estimate> = corpus
                .members()
                .iter()
                .map(|m| {
                    let f = &m.series;
                    let e = match estimator {
                        Estimator::Slice => lipschitz::slice_norm(f, w, i, &plan),
                        Estimator::Component => lipschitz::component_norm(f, &cfg.omega1, &cfg.omega2, i, &plan),
                        Estimator::Global => lipschitz::global_norm(f, w, &plan),
                        Estimator::Boundary => lipschitz::boundary_norm(f, w, i, &plan),
                        Estimator::Derivative => lipschitz::derivative_ratio(f, w, i, DerivativeMode::Full, &plan),
                        Estimator::DerivativePlus => lipschitz::derivative_ratio(f, w, i, DerivativeMode::Plus, &plan),
                        Estimator::DerivativeMinus => lipschitz::derivative_ratio(f, w, i, DerivativeMode::Minus, &plan),
                        Estimator::GlobalDerivative => lipschitz::global_derivative_ratio(f, w, &plan),
                    };
                    match e {
                        Ok(e) => Estimate { function: m.name.clone(), estimate: Some(e), error: None },
                        Err(e) => Estimate { function: m.name.clone(), estimate: None, error: Some(e.to_string()) },
                    }
                })
                .collect();
            write_output(run.out.as_deref(), &json(&rows))?;
            Ok(rows.iter().all(|r| r.error.is_none()))
        }
        Command::Verify { run, format } => {
            let cfg = run.config()?;
            let reports = verify::run_suite(&cfg)?;
            emit(&ReportDocument { config: cfg, reports }, run.out.as_deref(), format)
        }
        Command::Report { input, format, out } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let doc: ReportDocument = serde_json::from_str(&text).context("parsing report document")?;
            emit(&doc, out.as_deref(), format)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
