use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gsee_bench::evaluate::run_evaluate;
use gsee_bench::features::{run_features, FeatureTable};
use gsee_bench::oracle::run_oracle;
use gsee_bench::report::run_report;
use gsee_bench::solvability::run_solvability;
use gsee_bench::synth::{generate_catalog, SynthOptions};
use gsee_bench::{Result, RunConfig};
use gsee_core::catalog::Catalog;
use gsee_core::ml::LatentKind;

#[derive(Parser)]
#[command(
    name = "gsee-bench",
    version,
    about = "Ground-state energy estimation benchmark harness"
)]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Flags override values from `--config`, which override the defaults.
#[derive(Args)]
struct Flags {
    /// TOML file with the same keys as the flags (snake_case).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    df_threshold: Option<f64>,
    /// Interpret --df-threshold in Hartree instead of relative to the largest eigenvalue.
    #[arg(long, global = true)]
    df_absolute: bool,
    #[arg(long, global = true)]
    latent: Option<LatentKind>,
    #[arg(long, global = true)]
    latent_dim: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    solver: Option<String>,
    /// Comma-separated classifier features.
    #[arg(long, global = true, value_delimiter = ',')]
    features: Option<Vec<String>>,
    #[arg(long, global = true)]
    folds: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Feature table, correlation matrix and orbital histogram.
    Features,
    /// Score every solution file.
    Evaluate,
    /// Solvability map per solver.
    Solvability,
    /// Exact FCI energies for every task.
    Oracle,
    /// All of the above.
    Report,
    /// Write a synthetic catalog to --out.
    Synth {
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 3)]
        tasks_per_instance: usize,
    },
}

fn resolve(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::from_toml_file(path)?,
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($($field:ident),*) => {$(if let Some(v) = flags.$field.clone() { cfg.$field = v; })*};
    }
    set!(
        catalog,
        out,
        df_threshold,
        latent,
        latent_dim,
        samples,
        threshold,
        seed,
        jobs,
        features,
        folds
    );
    if flags.solver.is_some() {
        cfg.solver = flags.solver.clone();
    }
    if flags.df_absolute {
        cfg.df_absolute = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli.flags)?;
    if let Command::Synth {
        instances,
        tasks_per_instance,
    } = cli.command
    {
        return generate_catalog(
            &cfg.out,
            SynthOptions {
                instances,
                tasks_per_instance,
                seed: cfg.seed,
            },
        );
    }
    let catalog = Catalog::scan(&cfg.catalog)?;
    let pool = cfg.thread_pool()?;
    match cli.command {
        Command::Features => {
            run_features(&catalog, &cfg, &pool)?;
        }
        Command::Evaluate => {
            for s in run_evaluate(&catalog, &cfg)? {
                let sum = gsee_bench::evaluate::summarize(&s);
                println!(
                    "{}: {} solved / {} attempted",
                    sum.solver_uuid, sum.tasks_solved, sum.tasks_attempted
                );
            }
        }
        Command::Solvability => {
            let table: FeatureTable = run_features(&catalog, &cfg, &pool)?;
            let solvers = run_evaluate(&catalog, &cfg)?;
            for (solver, result) in run_solvability(&table, &solvers, &cfg, &pool)? {
                match result {
                    Ok(m) => println!(
                        "{solver}: solvability ratio {:.4}",
                        m.report.solvability_ratio
                    ),
                    Err(e) => println!("{solver}: skipped ({e})"),
                }
            }
        }
        Command::Oracle => {
            let run = run_oracle(&catalog, &cfg, &pool)?;
            println!(
                "{} tasks solved exactly, {} skipped",
                run.results.len(),
                run.failures.len()
            );
        }
        Command::Report => {
            let index = run_report(&cfg)?;
            for s in &index.solvers {
                let ratio = s
                    .solvability_ratio
                    .map_or_else(|| "n/a".to_string(), |r| format!("{r:.4}"));
                println!(
                    "{}: {} solved / {} attempted, solvability {ratio}",
                    s.summary.solver_uuid, s.summary.tasks_solved, s.summary.tasks_attempted
                );
            }
        }
        Command::Synth { .. } => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
