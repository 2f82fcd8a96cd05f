use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use latlab::error::LabError;
use latlab_cli::config::{Command, Format, RunConfig};
use latlab_cli::output::write_report;
use latlab_cli::suites::{run_suite, Ctx};

/// Verification suites for lattice-point error terms and zeta moments.
#[derive(Parser, Debug)]
#[command(name = "latlab", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// key = value file with [section] headers
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    budget_seconds: Option<f64>,
    /// Sieve cache directory (overrides LATLAB_CACHE_DIR)
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Heights T for the command's suite, comma separated
    #[arg(long = "T")]
    t: Option<String>,
    /// Sieve size or series cutoff
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    s: Option<String>,
    /// Parameter grid name (funceq accepts `default`)
    #[arg(long)]
    grid: Option<String>,
    /// Any config key, as section.key=value
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_BUDGET: u8 = 3;

fn overrides(cli: &Cli) -> Result<BTreeMap<String, String>, String> {
    let mut o = BTreeMap::new();
    let run = |k: &str| format!("run.{k}");
    if let Some(v) = &cli.out {
        o.insert(run("out"), v.display().to_string());
    }
    if let Some(v) = cli.format {
        o.insert(run("format"), format!("{v:?}").to_lowercase());
    }
    if let Some(v) = cli.threads {
        o.insert(run("threads"), v.to_string());
    }
    if let Some(v) = cli.budget_seconds {
        o.insert(run("budget_seconds"), v.to_string());
    }
    if let Some(v) = &cli.cache {
        o.insert(run("cache"), v.display().to_string());
    }
    let grid_flags = [("T", &cli.t), ("N", &cli.n), ("x", &cli.x), ("h", &cli.h), ("sigma", &cli.sigma), ("s", &cli.s), ("grid", &cli.grid)];
    for (key, val) in grid_flags {
        if let Some(v) = val {
            if matches!(cli.command, Command::All | Command::Calibrate) {
                return Err(format!("--{key} needs a single suite; use --set section.{key}=..."));
            }
            o.insert(format!("{}.{key}", cli.command.name()), v.clone());
        }
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set {kv}: expected section.key=value"))?;
        o.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(o)
}

fn exit_for(e: &LabError) -> u8 {
    match e {
        LabError::Budget(_) => EXIT_BUDGET,
        LabError::OutOfRange { .. } | LabError::Domain(_) | LabError::LimitExceedsCap { .. } | LabError::SignCondition(_) => {
            EXIT_CONFIG
        }
        _ => EXIT_FAIL,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match overrides(&cli).and_then(|o| RunConfig::load(cli.command, cli.config.as_deref(), &o).map_err(|e| e.to_string())) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(n) = cfg.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    }
    let ctx = match Ctx::new(&cfg) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_for(&e));
        }
    };
    let suites: Vec<Command> = if cfg.command == Command::All { Command::SUITES.to_vec() } else { vec![cfg.command] };
    let mut code = 0u8;
    for suite in suites {
        let started = Instant::now();
        let report = match run_suite(&ctx, suite) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("{}: error: {e}", suite.name());
                code = code.max(exit_for(&e));
                continue;
            }
        };
        if let Err(e) = write_report(&cfg.out, cfg.format, &report) {
            eprintln!("{}: cannot write reports to {}: {e}", suite.name(), cfg.out.display());
            code = code.max(EXIT_FAIL);
        }
        for c in &report.summary.criteria {
            println!("{}", c.line());
        }
        eprintln!("{} finished in {:.1} s", suite.name(), started.elapsed().as_secs_f64());
        if report.summary.partial {
            eprintln!("{}: budget exhausted, results are partial", suite.name());
            code = code.max(EXIT_BUDGET);
        } else if !report.summary.all_passed() {
            code = code.max(EXIT_FAIL);
        }
    }
    ExitCode::from(code)
}
