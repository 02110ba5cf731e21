use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use subadd_core::theorems::CheckId;
use subadd_lab::commands::{self, CliError, CliResult, Quantity, Session};
use subadd_lab::config::{AnalysisConfig, Format, FunctionSource};
use subadd_lab::report::{render, Rendered, Report};

#[derive(Parser)]
#[command(name = "subadd-lab", version, about = "Exact-arithmetic laboratory for subadditive functions")]
struct Cli {
    /// Configuration file (`[basis]`, `[function]`, `[subgroup]`, `[sigma]`, `[schedules]`, `[output]`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Comparison tolerance, e.g. `1e-6` or `1/1000000`.
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    t_max: Option<String>,
    /// Grid height for pair checks.
    #[arg(long, global = true)]
    height: Option<u64>,
    /// json, text or csv-bundle.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file (a directory for csv-bundle); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads. Never changes the output.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Subadditivity probe and every growth constant.
    Analyze {
        #[arg(allow_hyphen_values = true)]
        function: Option<String>,
    },
    /// Run a theorem check (`all` for every check the context allows).
    Check {
        check_id: String,
        #[arg(allow_hyphen_values = true)]
        function: Option<String>,
        #[arg(long)]
        subgroup: Option<String>,
        #[arg(long)]
        sigma: Option<String>,
    },
    /// `S*` at a point, plus `S_A^±` when a subgroup is given.
    Envelope {
        #[arg(allow_hyphen_values = true)]
        function: Option<String>,
        #[arg(long)]
        at: String,
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// Extend a function known on a dense subgroup.
    Extend {
        #[arg(allow_hyphen_values = true)]
        function: Option<String>,
        #[arg(long)]
        subgroup: Option<String>,
    },
    /// List the built-in functions.
    Gallery { name: Option<String> },
    /// The indicator of the irrationals.
    DemoCounterexample,
    /// Raw trace of one quantity for plotting.
    Trace {
        #[arg(allow_hyphen_values = true)]
        function: Option<String>,
        #[arg(long, value_enum)]
        quantity: QuantityArg,
        #[arg(long)]
        at: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Beta,
    Gamma,
    Envelope,
}

fn load_config(cli: &Cli) -> CliResult<AnalysisConfig> {
    let mut cfg = match &cli.config {
        Some(p) => AnalysisConfig::load(p)?,
        None => AnalysisConfig::default(),
    };
    let s = &mut cfg.schedules;
    if let Some(t) = &cli.tol {
        s.set("tol", t).map_err(CliError::Usage)?;
    }
    if let Some(t) = &cli.t_max {
        s.set("t_max", t).map_err(CliError::Usage)?;
    }
    if let Some(h) = cli.height {
        s.checks.grid_height = h;
    }
    s.validate()?;
    if let Some(f) = &cli.format {
        cfg.format = Some(f.parse()?);
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn session(mut cfg: AnalysisConfig, function: Option<&String>) -> CliResult<Session> {
    if let Some(f) = function {
        cfg.function = Some(FunctionSource::guess(f));
    }
    let resolved = match &cfg.function {
        Some(src) => {
            let base = if function.is_some() { PathBuf::from(".") } else { cfg.base_dir.clone() };
            Some(src.resolve(&base)?)
        }
        None => None,
    };
    Session::new(cfg, resolved)
}

fn run(cli: &Cli) -> CliResult<(Report, Format, Option<PathBuf>)> {
    let mut cfg = load_config(cli)?;
    let format = cfg.format.unwrap_or(Format::Text);
    let out = cfg.out.clone();
    let report = match &cli.command {
        Command::Analyze { function } => commands::analyze_cmd(&session(cfg, function.as_ref())?)?,
        Command::Check {
            check_id,
            function,
            subgroup,
            sigma,
        } => {
            if subgroup.is_some() {
                cfg.subgroup = subgroup.clone();
            }
            if sigma.is_some() {
                cfg.sigma = sigma.clone();
            }
            let ids = if check_id.eq_ignore_ascii_case("all") {
                Vec::new()
            } else {
                vec![check_id.parse::<CheckId>().map_err(|e| CliError::Usage(e.to_string()))?]
            };
            commands::check_cmd(&session(cfg, function.as_ref())?, &ids)?
        }
        Command::Envelope { function, at, subgroup } => {
            if subgroup.is_some() {
                cfg.subgroup = subgroup.clone();
            }
            commands::envelope_cmd(&session(cfg, function.as_ref())?, at)?
        }
        Command::Extend { function, subgroup } => {
            if subgroup.is_some() {
                cfg.subgroup = subgroup.clone();
            }
            commands::extend_cmd(&session(cfg, function.as_ref())?)?
        }
        Command::Gallery { name } => commands::gallery_cmd(&session(cfg, None)?, name.as_deref())?,
        Command::DemoCounterexample => commands::demo_cmd(&session(cfg, None)?)?,
        Command::Trace { function, quantity, at } => {
            let q = match quantity {
                QuantityArg::Beta => Quantity::Beta,
                QuantityArg::Gamma => Quantity::Gamma,
                QuantityArg::Envelope => Quantity::Envelope,
            };
            commands::trace_cmd(&session(cfg, function.as_ref())?, q, at.as_deref())?
        }
    };
    Ok((report, format, out))
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    use std::io::Write;
    match (render(report, format), out) {
        (Rendered::Bundle(files), Some(dir)) => {
            std::fs::create_dir_all(dir)?;
            for (name, bytes) in files {
                std::fs::write(dir.join(name), bytes)?;
            }
            Ok(())
        }
        (r, Some(path)) => std::fs::write(path, r.into_bytes()),
        (r, None) => std::io::stdout().lock().write_all(&r.into_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {}", e);
            return ExitCode::from(3);
        }
    }
    match run(&cli) {
        Ok((report, format, out)) => {
            match emit(&report, format, out.as_deref()) {
                Ok(()) => {}
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                Err(e) => {
                    eprintln!("error: {}", e);
                    return ExitCode::from(3);
                }
            }
            ExitCode::from(report.outcome().exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
