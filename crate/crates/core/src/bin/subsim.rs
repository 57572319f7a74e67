use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subsim::app::{
    cmd_p0_sweep, cmd_run, cmd_sigma_scan, cmd_study, p0_sweep_csv, sigma_scan_csv, write_atomic,
    write_study, AppError, ExitStatus, RunConfig,
};

/// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "subsim", version, about = "Subset Simulation for rare-event failure probabilities")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed of the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `out` in the config file).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single run with posterior summary.
    Run {
        #[command(flatten)]
        common: Common,
        /// Adds the exact product-of-betas density to the posterior grid.
        #[arg(long)]
        exact_posterior: bool,
    },
    /// Repeated runs with derived seeds.
    Study {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        runs: usize,
    },
    /// Total c.o.v. as a function of p0.
    P0Sweep {
        #[arg(long, default_value_t = 1e-3)]
        pf: f64,
        #[arg(long, default_value_t = 2000.0)]
        n_total: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 2.0, 4.0, 6.0, 8.0, 10.0])]
        gammas: Vec<f64>,
        /// p0 values; defaults to 0.01, 0.02, ..., 0.99 above pf.
        #[arg(long, value_delimiter = ',')]
        p0: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correlation factor and acceptance rate against the proposal spread.
    SigmaScan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9, 1.0, 1.2, 1.5, 2.0])]
        sigmas: Vec<f64>,
        /// Samples per level (defaults to ss.n).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
    },
}

fn load(common: &Common) -> Result<RunConfig, AppError> {
    let mut cfg = RunConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<(), AppError> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let p = write_atomic(&dir.join(name), text.as_bytes())?;
            out!("wrote {}", p.display());
        }
        None => {
            use std::io::Write as _;
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitStatus, AppError> {
    match cli.command {
        Command::Run {
            common,
            exact_posterior,
        } => {
            let cfg = load(&common)?;
            let outcome = cmd_run(&cfg, cfg.out.as_deref(), exact_posterior)?;
            let s = &outcome.summary;
            out!(
                "estimate {:e}  m {}  posterior mean {:e}  cov {:.3}  evaluations {}",
                s.estimate, s.m, s.posterior.mean, s.posterior.cov, s.total_evaluations
            );
            if outcome.status == ExitStatus::NotConverged {
                eprintln!("warning: run stopped at max_levels before reaching the failure domain");
            }
            for f in &outcome.files {
                out!("wrote {}", f.display());
            }
            Ok(outcome.status)
        }
        Command::Study { common, runs } => {
            let cfg = load(&common)?;
            let report = cmd_study(&cfg, runs)?;
            out!(
                "{} of {} runs  mean {:e}  frequentist cov {:.3}  mean posterior cov {:.3}",
                report.completed,
                report.runs.len(),
                report.mean_estimate,
                report.frequentist_cov,
                report.mean_posterior_cov
            );
            if let Some(dir) = cfg.out.as_deref() {
                for f in write_study(&report, dir)? {
                    out!("wrote {}", f.display());
                }
            }
            Ok(if report.partial {
                ExitStatus::Runtime
            } else {
                ExitStatus::Success
            })
        }
        Command::P0Sweep {
            pf,
            n_total,
            gammas,
            p0,
            out,
        } => {
            let grid = if p0.is_empty() {
                (1..100).map(|i| i as f64 / 100.0).filter(|&p| p > pf).collect()
            } else {
                p0
            };
            let sweep = cmd_p0_sweep(pf, n_total, &gammas, &grid)?;
            emit(out.as_deref(), "p0_sweep.csv", &p0_sweep_csv(&sweep))?;
            Ok(ExitStatus::Success)
        }
        Command::SigmaScan {
            common,
            level,
            sigmas,
            n,
            reps,
        } => {
            let cfg = load(&common)?;
            let table = cmd_sigma_scan(&cfg, level, &sigmas, n, reps)?;
            emit(cfg.out.as_deref(), "sigma_scan.csv", &sigma_scan_csv(&cfg, &table))?;
            Ok(ExitStatus::Success)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ExitStatus::Config as u8 } else { 0 });
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(ExitStatus::Runtime as u8);
        }
    }
    match execute(cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
