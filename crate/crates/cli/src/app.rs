//! Subcommand parsing and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use dealerfield_core::engine::{replication_seed, simulate_run_traced};
use dealerfield_core::ladder::BracketDenominator;
use dealerfield_core::quoting::{optimal_quotes, QuoteContext};
use dealerfield_core::{ensemble_stats, validate, DealerStats, QuotePair, SimConfig, ValidConfig};

use crate::checks::{analytic_spreads, run_checks, CheckOptions};
use crate::config::parse_config;
use crate::output::{self, sig6, TraceWriter};
use crate::parallel::run_ensemble;
use crate::presets::{preset, PRESET_NAMES};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "dealerfield", version, about = "Competitive market-making experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an ensemble from a config or preset and write stats.csv.
    Simulate(SourceArgs),
    /// Run named presets and write one stats.csv per preset.
    Tables(TablesArgs),
    /// Write the deterministic quote schedule of one dealer.
    Quotes(QuotesArgs),
    /// Run the oracle and invariant suite and write check_report.csv.
    Check(CheckArgs),
    /// Run one seeded replication and write trace.csv.
    Trace(SourceArgs),
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// JSON configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named preset (table1 .. table9).
    #[arg(long)]
    preset: Option<String>,
    /// Override the number of replications.
    #[arg(long)]
    runs: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write trace.csv for the first replication.
    #[arg(long)]
    trace: bool,
    /// Use the bracket denominator without `+γ` in ladder values.
    #[arg(long)]
    alt_denominator: bool,
}

#[derive(Debug, Args)]
struct TablesArgs {
    /// Presets to run, comma separated; all when omitted.
    #[arg(long, value_delimiter = ',')]
    preset: Vec<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct QuotesArgs {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Inventory held fixed along the schedule.
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    q: i64,
    /// Dealer whose quotes are printed (1-based).
    #[arg(long, default_value_t = 1)]
    dealer: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Replications for the ensemble-based checks.
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    alt_denominator: bool,
}

/// What a successful invocation produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// False when `check` found a failing row.
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

/// Parses `argv` (program name first) and runs the subcommand, writing
/// human-readable output to `stdout`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> Result<Outcome, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    write!(stdout, "{e}").map_err(stdout_error)?;
                    Ok(Outcome {
                        passed: true,
                        files: Vec::new(),
                    })
                }
                ErrorKind::InvalidSubcommand => Err(CliError::UnknownSubcommand(
                    argv.get(1).map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                )),
                _ => Err(CliError::Usage(e.to_string())),
            };
        }
    };
    match cli.command {
        Command::Simulate(args) => simulate(&args, stdout),
        Command::Tables(args) => tables(&args, stdout),
        Command::Quotes(args) => quotes(&args, stdout),
        Command::Check(args) => check(&args, stdout),
        Command::Trace(args) => trace(&args, stdout),
    }
}

fn stdout_error(source: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn load(config: &Option<PathBuf>, preset_name: &Option<String>) -> Result<SimConfig, CliError> {
    match (config, preset_name) {
        (Some(path), _) => Ok(parse_config(path)?.into_inner()),
        (None, Some(name)) => Ok(preset(name)?.config),
        (None, None) => Err(CliError::MissingSource),
    }
}

fn resolve(args: &SourceArgs) -> Result<ValidConfig, CliError> {
    let mut cfg = load(&args.config, &args.preset)?;
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.flags.trace |= args.trace;
    cfg.flags.alt_denominator |= args.alt_denominator;
    Ok(validate(cfg)?)
}

fn print_stats(stdout: &mut dyn Write, title: &str, rows: &[DealerStats]) -> Result<(), CliError> {
    writeln!(stdout, "{title}").map_err(stdout_error)?;
    writeln!(stdout, "{}", output::STATS_HEADER.join("\t")).map_err(stdout_error)?;
    for (i, r) in rows.iter().enumerate() {
        writeln!(
            stdout,
            "{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            sig6(r.average_spread),
            sig6(r.mean_profit),
            sig6(r.std_profit),
            sig6(r.mean_q_t),
            sig6(r.std_q_t)
        )
        .map_err(stdout_error)?;
    }
    Ok(())
}

fn write_trace(cfg: &ValidConfig, path: &Path) -> Result<(), CliError> {
    let mut writer = TraceWriter::create(path, cfg.n_dealers())?;
    simulate_run_traced(cfg, replication_seed(cfg.seed, 0), |step| writer.record(step));
    writer.finish()
}

fn simulate(args: &SourceArgs, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = resolve(args)?;
    let results = run_ensemble(&cfg)?;
    let stats = ensemble_stats(&results)?;
    let mut files = vec![args.out.join("stats.csv")];
    output::write_stats(&files[0], &stats.dealers)?;
    if cfg.flags.trace {
        let path = args.out.join("trace.csv");
        write_trace(&cfg, &path)?;
        files.push(path);
    }
    let title = format!("{} runs, seed {}, clamped draws {}", stats.runs, cfg.seed, stats.clamped);
    print_stats(stdout, &title, &stats.dealers)?;
    Ok(Outcome { passed: true, files })
}

fn tables(args: &TablesArgs, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let names: Vec<String> = if args.preset.is_empty() {
        PRESET_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        args.preset.clone()
    };
    let mut files = Vec::new();
    for name in &names {
        let p = preset(name)?;
        let mut cfg = p.config.with_seed(args.seed);
        if let Some(runs) = args.runs {
            cfg.runs = runs;
        }
        let cfg = validate(cfg)?;
        let stats = ensemble_stats(&run_ensemble(&cfg)?)?;
        // the spread column is path-free; report its continuous-time average
        let rows: Vec<DealerStats> = stats
            .dealers
            .iter()
            .zip(analytic_spreads(&cfg))
            .map(|(row, spread)| DealerStats {
                average_spread: spread,
                ..*row
            })
            .collect();
        let path = args.out.join(p.name).join("stats.csv");
        output::write_stats(&path, &rows)?;
        print_stats(stdout, &format!("{} ({}; {} runs)", p.name, p.caption, stats.runs), &rows)?;
        files.push(path);
    }
    Ok(Outcome { passed: true, files })
}

/// `(t_l, quotes)` for dealer `dealer` holding `q` over the whole grid, the
/// others irrelevant to its own quotes.
pub fn quote_schedule(cfg: &ValidConfig, dealer: usize, q: i64) -> Vec<(f64, QuotePair)> {
    let grid = cfg.grid();
    let spec = &cfg.dealers[dealer];
    (0..grid.n_steps)
        .map(|l| {
            let ctx = QuoteContext::new(spec, &cfg.market, cfg.n_dealers(), q, grid.remaining(l));
            (grid.time(l), optimal_quotes(&ctx))
        })
        .collect()
}

fn quotes(args: &QuotesArgs, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = validate(load(&args.config, &args.preset)?)?;
    let n = cfg.n_dealers();
    if args.dealer == 0 || args.dealer > n {
        return Err(CliError::DealerOutOfRange { dealer: args.dealer, n });
    }
    let rows = quote_schedule(&cfg, args.dealer - 1, args.q);
    let path = args.out.join("quotes.csv");
    output::write_quotes(&path, &rows)?;
    writeln!(stdout, "t\tdelta_b\tdelta_a").map_err(stdout_error)?;
    for (t, q) in &rows {
        writeln!(stdout, "{}\t{}\t{}", sig6(*t), sig6(q.delta_b), sig6(q.delta_a)).map_err(stdout_error)?;
    }
    Ok(Outcome {
        passed: true,
        files: vec![path],
    })
}

fn check(args: &CheckArgs, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let opts = CheckOptions {
        runs: args.runs,
        seed: args.seed,
        denominator: if args.alt_denominator {
            BracketDenominator::WithoutGamma
        } else {
            BracketDenominator::WithGamma
        },
    };
    let rows = run_checks(&opts)?;
    let path = args.out.join("check_report.csv");
    let mut w = output::writer(&path)?;
    w.write_record(["name", "expected", "actual", "tolerance", "pass"])
        .map_err(|e| CliError::csv(&path, e))?;
    let mut passed = true;
    for row in &rows {
        let ok = row.pass();
        passed &= ok;
        w.write_record([
            row.name.clone(),
            sig6(row.expected),
            sig6(row.actual),
            row.tolerance_label(),
            ok.to_string(),
        ])
        .map_err(|e| CliError::csv(&path, e))?;
        writeln!(
            stdout,
            "{} {} (actual {}, expected {}, tolerance {})",
            if ok { "PASS" } else { "FAIL" },
            row.name,
            sig6(row.actual),
            sig6(row.expected),
            row.tolerance_label()
        )
        .map_err(stdout_error)?;
    }
    output::finish(w, &path)?;
    let failed = rows.iter().filter(|r| !r.pass()).count();
    writeln!(stdout, "{} checks, {} failed", rows.len(), failed).map_err(stdout_error)?;
    Ok(Outcome {
        passed,
        files: vec![path],
    })
}

fn trace(args: &SourceArgs, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = resolve(args)?;
    let path = args.out.join("trace.csv");
    write_trace(&cfg, &path)?;
    writeln!(stdout, "wrote {}", path.display()).map_err(stdout_error)?;
    Ok(Outcome {
        passed: true,
        files: vec![path],
    })
}
