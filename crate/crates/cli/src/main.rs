use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddef_core::check::{run_model, CheckOptions, RunReport, RunSettings, Status};
use ddef_core::print::{Annotations, PrintOptions, Printer, TreeDump};
use ddef_core::{parse_formula, parse_model, parse_program, parse_term, ModelFile, OracleConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;

#[derive(Parser)]
#[command(name = "ddef", version, about = "Differentially-defined functions for hybrid system models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a model or a single expression and print it back.
    Parse(ParseArgs),
    /// Validate the generated lemmas of the families a model uses.
    Lemmas(RunArgs),
    /// Run lemma validation and the model's declared checks.
    Check(RunArgs),
}

#[derive(Args)]
struct ParseArgs {
    #[arg(required_unless_present_any = ["expr_term", "expr_formula", "expr_program"])]
    path: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["path", "expr_formula", "expr_program"])]
    expr_term: Option<String>,
    #[arg(long, conflicts_with_all = ["path", "expr_term", "expr_program"])]
    expr_formula: Option<String>,
    #[arg(long, conflicts_with_all = ["path", "expr_term", "expr_formula"])]
    expr_program: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct RunArgs {
    path: PathBuf,
    /// Tolerance for residuals and reported agreement.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulated time per run; overrides any horizon the model declares.
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    /// Accept families without an existence certificate. Taints the report.
    #[arg(long)]
    assume_existence: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Parse(args) => cmd_parse(&args),
        Command::Lemmas(args) => cmd_run(&args, false),
        Command::Check(args) => cmd_run(&args, true),
    }
}

fn load(path: &PathBuf) -> Result<ModelFile, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_USAGE)
    })?;
    parse_model(&text).map_err(|e| {
        eprintln!("{}:{e}", path.display());
        ExitCode::from(EXIT_FAIL)
    })
}

fn cmd_parse(args: &ParseArgs) -> ExitCode {
    let printed = if let Some(src) = &args.expr_term {
        parse_term(src).map(|t| format!("{}{t}", TreeDump::term(&t)))
    } else if let Some(src) = &args.expr_formula {
        parse_formula(src).map(|f| format!("{}{f}", TreeDump::formula(&f)))
    } else if let Some(src) = &args.expr_program {
        parse_program(src).map(|a| format!("{}{a}", TreeDump::program(&a)))
    } else {
        let path = args.path.as_ref().expect("clap enforces a path");
        let model = match load(path) {
            Ok(m) => m,
            Err(code) => return code,
        };
        let mut out = model.to_string();
        match model.declared_symbols() {
            Ok(symbols) => {
                for s in symbols {
                    let p = Printer::new(PrintOptions { annotations: Annotations::Full, elide_ode_bodies: false });
                    out.push_str(&format!("\n{} ~> {}", s.name, p.annotated_symbol(&s)));
                }
            }
            Err(e) => {
                eprintln!("{}: {e}", path.display());
                return ExitCode::from(EXIT_FAIL);
            }
        }
        Ok(out)
    };
    match printed {
        Ok(s) => {
            println!("{s}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("<expression>:{e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn cmd_run(args: &RunArgs, with_checks: bool) -> ExitCode {
    let model = match load(&args.path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let mut oracle = OracleConfig { rng_seed: args.seed, ..OracleConfig::default() };
    if let Some(h) = args.horizon {
        oracle.horizon = h;
    }
    let settings = RunSettings {
        check: CheckOptions { runs: args.runs, seed: args.seed, residual_tol: args.tol, horizon: args.horizon },
        oracle,
        assume_existence: args.assume_existence,
    };
    let report = match run_model(&model, &args.path.display().to_string(), &settings, with_checks) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", args.path.display());
            return ExitCode::from(EXIT_FAIL);
        }
    };
    emit(&report, args.format);
    match report.status {
        Status::Pass => ExitCode::SUCCESS,
        Status::Fail => ExitCode::from(EXIT_FAIL),
        Status::Unknown => ExitCode::from(EXIT_UNKNOWN),
    }
}

fn emit(report: &RunReport, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(report).expect("report serializes")),
        Format::Text => print!("{}", report.to_text()),
    }
}
