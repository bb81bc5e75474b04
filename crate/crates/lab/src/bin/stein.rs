use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stein_lab::config::ExperimentConfig;
use stein_lab::report::{bounds_csv, checks_csv, read_reports, sweep_csv, table, write_run, Format};
use stein_lab::runner::{bounds_only, run, RunError, RunOptions};
use stein_lab::sweep::{parse_assignment, sweep};

/// Zero-bias and size-bias coupling experiments.
#[derive(Parser)]
#[command(name = "stein", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config, or a directory of `*.toml` configs.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replicates (draws).
    #[arg(long)]
    reps: Option<u64>,
    /// Worker threads; defaults to the available hardware threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, env = "STEIN_OUT_DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate bound formulas only.
    Bound(Common),
    /// Generate draw streams into a spool file.
    Simulate(Common),
    /// Run the configured check suites.
    Verify(Common),
    /// Run a config over a parameter grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `path=v1,v2,...`; repeatable, overrides the config's [sweep] table.
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Reformat stored JSON reports.
    Report {
        /// A report file or a directory of them.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
}

const OK: u8 = 0;
const CHECK_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;

fn configs(path: &Path) -> Result<Vec<ExperimentConfig>, RunError> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        files.iter().map(|f| Ok(ExperimentConfig::load(f)?)).collect()
    } else {
        Ok(vec![ExperimentConfig::load(path)?])
    }
}

fn options(c: &Common) -> RunOptions {
    RunOptions { seed: c.seed, replicates: c.reps, threads: c.threads, spool_dir: None }
}

fn out_dir(c: &Common, cfg: &ExperimentConfig) -> PathBuf {
    c.out.clone().or_else(|| cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("stein-out"))
}

fn execute(cli: Cli) -> Result<u8, RunError> {
    match cli.command {
        Command::Bound(c) => {
            for cfg in configs(&c.config)? {
                let (moments, bounds) = bounds_only(&cfg, &options(&c))?;
                match c.format {
                    Some(Format::Csv) => print!("{}", bounds_csv(&cfg.id, &bounds)?),
                    _ => {
                        let v = serde_json::json!({ "id": cfg.id, "moments": moments, "bounds": bounds });
                        println!("{}", serde_json::to_string_pretty(&v)?);
                    }
                }
            }
            Ok(OK)
        }
        Command::Simulate(c) => {
            for cfg in configs(&c.config)? {
                let dir = out_dir(&c, &cfg);
                let mut opts = options(&c);
                opts.spool_dir = Some(dir.clone());
                let mut exp = opts.apply(&cfg).validate()?;
                exp.checks.clear();
                let report = stein_lab::run_experiment(&exp, &opts)?;
                write_run(&report, &dir, c.format.unwrap_or(Format::Json))?;
                eprintln!("{}: {} draws -> {}", report.id, report.replicates, report.spool.as_deref().unwrap_or(&dir).display());
            }
            Ok(OK)
        }
        Command::Verify(c) => {
            let mut code = OK;
            for cfg in configs(&c.config)? {
                let report = run(&cfg, &options(&c))?;
                write_run(&report, &out_dir(&c, &cfg), c.format.unwrap_or(Format::Json))?;
                print!("{}", table(&report));
                if !report.passed {
                    code = CHECK_FAILED;
                }
            }
            Ok(code)
        }
        Command::Sweep { common: c, set } => {
            let mut code = OK;
            for cfg in configs(&c.config)? {
                let mut grid = cfg.sweep.clone().map(|s| s.parameters).unwrap_or_default();
                for a in &set {
                    let (k, v) = parse_assignment(a)?;
                    grid.insert(k, v);
                }
                let rows = sweep(&cfg, &grid, &options(&c))?;
                let csv = sweep_csv(&rows)?;
                let dir = out_dir(&c, &cfg);
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join(format!("{}.sweep.csv", cfg.id)), &csv)?;
                for r in rows.iter().filter_map(|r| r.report.as_ref()) {
                    write_run(r, &dir, c.format.unwrap_or(Format::Json))?;
                }
                print!("{csv}");
                if rows.iter().any(|r| r.pass != Some(true)) {
                    code = CHECK_FAILED;
                }
            }
            Ok(code)
        }
        Command::Report { input, format } => {
            let reports = read_reports(&input)?;
            match format {
                Some(Format::Csv) => print!("{}", checks_csv(&reports)?),
                Some(Format::Json) => {
                    for r in &reports {
                        print!("{}", stein_lab::report::checks_jsonl(r)?);
                    }
                }
                None => reports.iter().for_each(|r| print!("{}", table(r))),
            }
            Ok(if reports.iter().all(|r| r.passed) { OK } else { CHECK_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
