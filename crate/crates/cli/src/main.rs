//! `qcharm`: command-line front end for the harmonic mapping laboratory.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qcharm_core::boundary::{make_boundary_map, BoundaryKind, DEFAULT_ORDER};
use qcharm_core::constants::{self, ConstantReport};
use qcharm_core::domain::DomainSpec;
use qcharm_core::harmonic::poisson_extend;
use qcharm_core::hopf::{self, AnnulusFunction, AnnulusGrid};
use qcharm_core::qc::{self, PolarGrid};
use qcharm_core::validation::{validate_all, ValidationConfig};
use qcharm_core::Error;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser, Serialize)]
#[command(name = "qcharm", version, about = "Harmonic quasiconformal maps of the disk: extension, distortion, explicit constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Truncation order N (2N boundary samples); a power of two >= 4.
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, global = true, default_value_t = 64)]
    n_r: usize,
    #[arg(long, global = true, default_value_t = 256)]
    n_theta: usize,
    #[arg(long, global = true, default_value_t = 0.999)]
    r_max: f64,
    /// Seed for random point pairs.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Sample a boundary map and report its Fourier data.
    Extend(MapArgs),
    /// Measure distortion of the harmonic extension.
    Analyze {
        #[command(flatten)]
        map: MapArgs,
        /// Precompose with a disk automorphism so that w(0) = 0.
        #[arg(long)]
        normalize: bool,
        /// Random pairs for the empirical bi-Lipschitz bounds.
        #[arg(long, default_value_t = 2000)]
        pairs: usize,
    },
    /// Evaluate the co-Lipschitz constant chain.
    Constants {
        #[arg(long = "K")]
        k: f64,
        #[command(flatten)]
        domain: DomainArgs,
    },
    /// Certify the annulus Hopf lemma for a test function.
    VerifyHopf {
        #[arg(long, value_enum)]
        test_fn: TestFn,
        #[arg(long)]
        rho: f64,
    },
    /// Report the degeneration of the extension of e^{i(x + sin x)}.
    Counterexample,
    /// Run the acceptance battery.
    Validate {
        /// Replace every tolerance by this value.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TestFn {
    Quadratic,
    Log,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MapKind {
    Identity,
    Sine,
    /// `ω(e^{i(x + λ sin kx)})` for the selected domain.
    Composed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DomainKind {
    Disk,
    Mobius,
    Polynomial,
}

#[derive(Debug, Args, Serialize)]
struct MapArgs {
    #[arg(long, value_enum, default_value_t = MapKind::Sine)]
    map: MapKind,
    #[arg(long, default_value_t = 0.3)]
    lambda: f64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[command(flatten)]
    domain: DomainArgs,
}

#[derive(Debug, Args, Serialize)]
struct DomainArgs {
    #[arg(long, value_enum, default_value_t = DomainKind::Disk)]
    domain: DomainKind,
    /// Polynomial coefficient c (real part).
    #[arg(long, default_value_t = 0.3)]
    c: f64,
    #[arg(long, default_value_t = 0.0)]
    c_im: f64,
    /// Polynomial degree n.
    #[arg(long, default_value_t = 3)]
    n: u32,
    /// Möbius zero a (real part).
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    a_im: f64,
    /// Möbius rotation angle.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
}

impl DomainArgs {
    fn spec(&self) -> DomainSpec {
        match self.domain {
            DomainKind::Disk => DomainSpec::Disk,
            DomainKind::Mobius => DomainSpec::Mobius {
                a: Complex64::new(self.a, self.a_im),
                phi: self.phi,
            },
            DomainKind::Polynomial => DomainSpec::Polynomial {
                c: Complex64::new(self.c, self.c_im),
                n: self.n,
            },
        }
    }
}

impl MapArgs {
    fn kind(&self) -> BoundaryKind {
        let sine = BoundaryKind::SinePerturbed {
            lambda: self.lambda,
            k: self.k,
        };
        match self.map {
            MapKind::Identity => BoundaryKind::Identity,
            MapKind::Sine => sine,
            MapKind::Composed => BoundaryKind::OmegaComposed {
                domain: self.domain.spec(),
                inner: Box::new(sine),
            },
        }
    }
}

enum Failure {
    Usage(String),
    /// Hypothesis or validation failure; the report is still emitted.
    Rejected(Value),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Hypothesis(items) => Failure::Rejected(json!({ "error": "hypothesis", "failures": items })),
            Error::NonHomeomorphism { .. } | Error::DomainMismatch { .. } | Error::Degeneracy { .. } | Error::DegenerateDomain { .. } => {
                Failure::Rejected(json!({ "error": "hypothesis", "failures": [e.to_string()] }))
            }
            Error::Io(io) => Failure::Io(io),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

enum Output {
    Json(Value),
    Csv(Vec<u8>),
}

fn grid(cli: &Cli) -> PolarGrid {
    PolarGrid::new(cli.n_r, cli.n_theta, cli.r_max)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn constants_csv(r: &ConstantReport) -> Result<Vec<u8>, Failure> {
    let mut out = Vec::new();
    writeln!(out, "stage,formula,value,ln_abs")?;
    for s in &r.trace {
        let ln = s.ln_abs.map(|v| format!("{v:.16e}")).unwrap_or_default();
        writeln!(out, "{},\"{}\",{:.16e},{}", s.name, s.formula, s.value, ln)?;
    }
    Ok(out)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Extend(map) => {
            let b = make_boundary_map(&map.kind(), cli.order)?;
            if cli.format == Format::Csv {
                let mut out = Vec::new();
                b.write_csv(&mut out)?;
                return Ok(Output::Csv(out));
            }
            let n = b.order() as i64;
            let coeffs: Vec<Value> = (-n..=n)
                .map(|i| json!([i, b.coeff(i).re, b.coeff(i).im]))
                .collect();
            Ok(Output::Json(json!({
                "samples": b.len(),
                "order": b.order(),
                "tail_magnitude": b.tail_magnitude(),
                "decay_ok": b.decay_ok(),
                "warnings": b.warnings(),
                "coefficients": coeffs,
            })))
        }
        Command::Analyze { map, normalize, pairs } => {
            let b = make_boundary_map(&map.kind(), cli.order)?;
            let mut w = poisson_extend(&b);
            if *normalize {
                w = qc::normalize_at_origin(&w)?;
            }
            let g = grid(cli);
            if cli.format == Format::Csv {
                let mut out = Vec::new();
                w.write_grid_csv(&g.points(), &mut out)?;
                return Ok(Output::Csv(out));
            }
            let report = qc::measure_dilatation(&w, &g)?;
            let pair_list = qc::random_pairs(cli.seed, *pairs, Complex64::new(0.0, 0.0), 1.0);
            let bil = qc::empirical_bilipschitz(&w, &pair_list)?;
            Ok(Output::Json(json!({
                "qc": report,
                "bilipschitz": bil,
                "tail_magnitude": w.tail_magnitude(),
                "decay_ok": w.decay_ok(),
                "warnings": b.warnings(),
            })))
        }
        Command::Constants { k, domain } => {
            let r = constants::colipschitz_constant(*k, &domain.spec())?;
            if cli.format == Format::Csv {
                return Ok(Output::Csv(constants_csv(&r)?));
            }
            Ok(Output::Json(to_value(&r)))
        }
        Command::VerifyHopf { test_fn, rho } => {
            let name = match test_fn {
                TestFn::Quadratic => "quadratic",
                TestFn::Log => "log",
                TestFn::Radial => "radial",
            };
            let u = AnnulusFunction::by_name(name).expect("known test function");
            let cert = hopf::verify_hopf(&u, *rho, &AnnulusGrid::default())?;
            let value = to_value(&cert);
            if cert.pass {
                Ok(Output::Json(value))
            } else {
                Err(Failure::Rejected(json!({ "error": "conclusion", "certificate": value })))
            }
        }
        Command::Counterexample => Ok(Output::Json(to_value(&constants::counterexample_report(cli.order)?))),
        Command::Validate { tolerance, only } => {
            let cfg = ValidationConfig {
                order: cli.order,
                grid: grid(cli),
                seed: cli.seed,
                tolerance_override: *tolerance,
                only: only.clone(),
            };
            let summary = validate_all(&cfg);
            let value = to_value(&summary);
            if summary.all_pass {
                Ok(Output::Json(value))
            } else {
                Err(Failure::Rejected(value))
            }
        }
    }
}

fn emit(cli: &Cli, bytes: &[u8]) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}

fn with_config(cli: &Cli, body: Value) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(&json!({ "config": cli, "report": body })).expect("json");
    text.push('\n');
    text.into_bytes()
}

fn configure_threads() {
    if let Some(n) = std::env::var("QCHARM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("QCHARM_THREADS ignored: {e}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    if cli.format == Format::Csv && !matches!(cli.command, Command::Extend(_) | Command::Analyze { .. } | Command::Constants { .. }) {
        eprintln!("error: --format csv is supported by extend, analyze and constants only");
        return ExitCode::from(2);
    }
    let (bytes, code) = match run(&cli) {
        Ok(Output::Json(v)) => (with_config(&cli, v), 0),
        Ok(Output::Csv(b)) => (b, 0),
        Err(Failure::Rejected(v)) => (with_config(&cli, v), 1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = emit(&cli, &bytes) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
