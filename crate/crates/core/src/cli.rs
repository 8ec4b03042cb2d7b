//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse or usage error, 3 singular
//! capacitance matrix (floating subcircuit), 4 zero target weight.

use crate::crosstalk::{
    self, AsymptoticReport, CrosstalkError, CrosstalkReport, RGrid,
};
use crate::netlist::{
    self, build_direct_coupled, build_floating_bus, build_grounded_bus, CouplingSide,
    DirectCoupledParams, FloatingBusParams, GroundedBusParams, Netlist, NetlistBuild,
    NetlistError,
};
use crate::quantize::{self, QuantizeError};
use crate::ratmat::{rat_int, rational_from_literal, Rational};
use num_traits::Zero;
use crate::report::AnalysisReport;
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "xtalk",
    version,
    about = "Exact quantization and microwave-crosstalk analysis for capacitively coupled superconducting circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LayoutArg {
    Same,
    Opposite,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuiltinKind {
    Direct,
    GroundedBus,
    FloatingBus,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a netlist file: assemble, eliminate free modes, and report
    /// crosstalk per drive port.
    Analyze {
        /// Netlist document path.
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Target coordinate used as the ratio denominator (defaults to the
        /// first qubit mode).
        #[arg(long)]
        target: Option<String>,
        /// Compare the reduced matrix against the matching large-island
        /// approximate form when the topology is canonical.
        #[arg(long)]
        check_asymptotic: bool,
        /// Victim-to-target impedance ratio; shifts victim strengths by
        /// -10 log10(z) beyond the equal-impedance assumption.
        #[arg(long)]
        z_ratio: Option<f64>,
    },
    /// Sweep the layout-table crosstalk ratio over a log-spaced r grid and
    /// write a CSV with exact ratio columns.
    Sweep {
        #[arg(long, value_enum)]
        layout: LayoutArg,
        /// Comma-separated island asymmetry ratios (each >= 1).
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long, default_value_t = 1e-3)]
        r_min: f64,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build one of the canonical circuits and analyze it, or emit its
    /// netlist with --emit.
    Builtin {
        kind: BuiltinKind,
        #[arg(long = "Cd")]
        c_d: Option<String>,
        #[arg(long = "Cq")]
        c_q: Option<String>,
        #[arg(long = "Cg")]
        c_g: Option<String>,
        #[arg(long = "Cc1")]
        c_c1: Option<String>,
        #[arg(long = "Cc2")]
        c_c2: Option<String>,
        #[arg(long = "Cc")]
        c_c: Option<String>,
        #[arg(long = "Ct")]
        c_t: Option<String>,
        #[arg(long = "Cb")]
        c_b: Option<String>,
        /// Island asymmetry for the direct circuit: islands become
        /// (Cg, lambda Cg, Cg, lambda Cg).
        #[arg(long)]
        lambda: Option<String>,
        /// Write the netlist document here instead of analyzing.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        check_asymptotic: bool,
    },
}

enum CliError {
    Io(String),
    Input(String),
    Singular(String),
    ZeroTarget(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Input(_) => 2,
            CliError::Singular(_) => 3,
            CliError::ZeroTarget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Input(m) | CliError::Singular(m) | CliError::ZeroTarget(m) => m,
        }
    }
}

impl From<NetlistError> for CliError {
    fn from(e: NetlistError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<QuantizeError> for CliError {
    fn from(e: QuantizeError) -> Self {
        CliError::Singular(e.to_string())
    }
}

impl From<CrosstalkError> for CliError {
    fn from(e: CrosstalkError) -> Self {
        match e {
            CrosstalkError::ZeroTargetWeight(_) => CliError::ZeroTarget(e.to_string()),
            CrosstalkError::Quantize(inner) => inner.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Analyze {
            file,
            format,
            target,
            check_asymptotic,
            z_ratio,
        } => read_netlist(&file).and_then(|netlist| {
            analyze_netlist(&netlist, format, target.as_deref(), check_asymptotic, z_ratio)
        }),
        Command::Sweep {
            layout,
            lambda,
            r_min,
            r_max,
            points,
            out,
        } => run_sweep(layout, &lambda, r_min, r_max, points, &out),
        Command::Builtin {
            kind,
            c_d,
            c_q,
            c_g,
            c_c1,
            c_c2,
            c_c,
            c_t,
            c_b,
            lambda,
            emit,
            format,
            target,
            check_asymptotic,
        } => run_builtin(BuiltinArgs {
            kind,
            c_d,
            c_q,
            c_g,
            c_c1,
            c_c2,
            c_c,
            c_t,
            c_b,
            lambda,
            emit,
            format,
            target,
            check_asymptotic,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn configure_threads() {
    if let Ok(value) = std::env::var("XTALK_THREADS") {
        match value.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => eprintln!("warning: ignoring invalid XTALK_THREADS value `{value}`"),
        }
    }
}

fn read_netlist(path: &Path) -> Result<Netlist, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(netlist::parse(&text)?)
}

fn default_target(reduced: &crate::quantize::ReducedSystem) -> Result<String, CliError> {
    crosstalk::default_target(reduced)
        .ok_or_else(|| CliError::Input("circuit has no non-drive coordinates to target".into()))
}

fn analyze_netlist(
    netlist: &Netlist,
    format: Format,
    target: Option<&str>,
    check_asymptotic: bool,
    z_ratio: Option<f64>,
) -> Result<(), CliError> {
    if let Some(z) = z_ratio {
        if !z.is_finite() || z <= 0.0 {
            return Err(CliError::Input("--z-ratio must be positive".into()));
        }
    }
    let analysis = quantize::analyze(netlist)?;
    let target = match target {
        Some(t) => t.to_owned(),
        None => default_target(&analysis.reduced)?,
    };
    let mut reports: Vec<CrosstalkReport> = Vec::new();
    for port in netlist.drives() {
        reports.push(crosstalk::report(
            &analysis.reduced,
            &port.name,
            &port.source_node,
            &target,
        )?);
    }
    let asymptotic: Option<AsymptoticReport> = if check_asymptotic {
        match crosstalk::detect_asymptotic_form(netlist) {
            Some(form) => Some(crosstalk::asymptotic_check(netlist, &analysis.reduced, form)?),
            None => {
                eprintln!("warning: asymptotic check skipped; no canonical topology matches");
                None
            }
        }
    } else {
        None
    };
    let report = AnalysisReport::build(netlist, &analysis, &reports, z_ratio, asymptotic.as_ref());
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }
    Ok(())
}

fn run_sweep(
    layout: LayoutArg,
    lambda: &str,
    r_min: f64,
    r_max: f64,
    points: usize,
    out: &Path,
) -> Result<(), CliError> {
    let side = match layout {
        LayoutArg::Same => CouplingSide::SameIsland,
        LayoutArg::Opposite => CouplingSide::OppositeIsland,
    };
    let lambdas: Vec<Rational> = lambda
        .split(',')
        .map(|part| {
            rational_from_literal(part.trim())
                .map_err(|e| CliError::Input(format!("--lambda: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if lambdas.is_empty() {
        return Err(CliError::Input("--lambda list is empty".into()));
    }
    let grid = RGrid {
        r_min,
        r_max,
        points,
    };
    let table = crosstalk::sweep(side, &lambdas, &grid)?;
    std::fs::write(out, table.to_csv())
        .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    Ok(())
}

struct BuiltinArgs {
    kind: BuiltinKind,
    c_d: Option<String>,
    c_q: Option<String>,
    c_g: Option<String>,
    c_c1: Option<String>,
    c_c2: Option<String>,
    c_c: Option<String>,
    c_t: Option<String>,
    c_b: Option<String>,
    lambda: Option<String>,
    emit: Option<PathBuf>,
    format: Format,
    target: Option<String>,
    check_asymptotic: bool,
}

fn parse_cap(value: &Option<String>, name: &str) -> Result<Option<Rational>, CliError> {
    match value {
        None => Ok(None),
        Some(text) => rational_from_literal(text)
            .map(Some)
            .map_err(|e| CliError::Input(format!("--{name}: {e}"))),
    }
}

fn required(value: Option<Rational>, name: &str) -> Result<Rational, CliError> {
    value.ok_or_else(|| CliError::Input(format!("missing required parameter --{name}")))
}

fn reject_unused(values: &[(&Option<String>, &str)], kind: &str) -> Result<(), CliError> {
    for (value, name) in values {
        if value.is_some() {
            return Err(CliError::Input(format!(
                "--{name} does not apply to the {kind} circuit"
            )));
        }
    }
    Ok(())
}

fn run_builtin(args: BuiltinArgs) -> Result<(), CliError> {
    let c_d = parse_cap(&args.c_d, "Cd")?;
    let c_q = parse_cap(&args.c_q, "Cq")?;
    let c_g = parse_cap(&args.c_g, "Cg")?;
    let c_c1 = parse_cap(&args.c_c1, "Cc1")?;
    let c_c2 = parse_cap(&args.c_c2, "Cc2")?;
    let c_c = parse_cap(&args.c_c, "Cc")?;
    let c_t = parse_cap(&args.c_t, "Ct")?;
    let c_b = parse_cap(&args.c_b, "Cb")?;
    let lambda = parse_cap(&args.lambda, "lambda")?;
    let build: NetlistBuild = match args.kind {
        BuiltinKind::Direct => {
            reject_unused(
                &[(&args.c_c, "Cc"), (&args.c_t, "Ct"), (&args.c_b, "Cb")],
                "direct",
            )?;
            let c_g = required(c_g, "Cg")?;
            let lambda = lambda.unwrap_or_else(|| rat_int(1));
            if lambda < rat_int(1) {
                return Err(CliError::Input("--lambda must be >= 1".into()));
            }
            let far_island = &lambda * &c_g;
            build_direct_coupled(&DirectCoupledParams {
                c_d: required(c_d, "Cd")?,
                c_q: required(c_q, "Cq")?,
                c_g1: c_g.clone(),
                c_g2: far_island.clone(),
                c_g3: c_g,
                c_g4: far_island,
                c_c1: c_c1.unwrap_or_else(Rational::zero),
                c_c2: c_c2.unwrap_or_else(Rational::zero),
            })?
        }
        BuiltinKind::GroundedBus => {
            reject_unused(
                &[
                    (&args.c_c1, "Cc1"),
                    (&args.c_c2, "Cc2"),
                    (&args.c_b, "Cb"),
                    (&args.lambda, "lambda"),
                ],
                "grounded-bus",
            )?;
            build_grounded_bus(&GroundedBusParams {
                c_d: required(c_d, "Cd")?,
                c_q: required(c_q, "Cq")?,
                c_g: required(c_g, "Cg")?,
                c_c: c_c.unwrap_or_else(Rational::zero),
                c_t: required(c_t, "Ct")?,
            })?
        }
        BuiltinKind::FloatingBus => {
            reject_unused(
                &[
                    (&args.c_c1, "Cc1"),
                    (&args.c_c2, "Cc2"),
                    (&args.lambda, "lambda"),
                ],
                "floating-bus",
            )?;
            build_floating_bus(&FloatingBusParams {
                c_d: required(c_d, "Cd")?,
                c_q: required(c_q, "Cq")?,
                c_g: required(c_g, "Cg")?,
                c_c: c_c.unwrap_or_else(Rational::zero),
                c_t: required(c_t, "Ct")?,
                c_b: required(c_b, "Cb")?,
            })?
        }
    };
    for warning in &build.warnings {
        eprintln!("warning: {warning}");
    }
    match args.emit {
        Some(path) => {
            std::fs::write(&path, netlist::render(&build.netlist))
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(())
        }
        None => analyze_netlist(
            &build.netlist,
            args.format,
            args.target.as_deref(),
            args.check_asymptotic,
            None,
        ),
    }
}
