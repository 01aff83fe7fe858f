use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use zrp_cli::commands;
use zrp_cli::experiment::with_threads;
use zrp_cli::output::write_json;
use zrp_cli::selftest::{Selftest, CRITERIA};
use zrp_cli::{CliError, ExperimentConfig, Result};

#[derive(Parser)]
#[command(name = "zrp", version, about = "Disordered zero-range process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "ZRP_THREADS")]
    threads: Option<usize>,
    /// Output directory; defaults to `output.dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Critical density, mean variance and regime flags.
    CriticalDensity(Common),
    /// Full configurations per replica and the weight table.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Largest k in weights.csv.
        #[arg(long, default_value_t = 100)]
        weights_kmax: usize,
    },
    /// Condensate statistics with rank and fitness law comparisons.
    Condense(Common),
    /// Scaled condensate fluctuations.
    Fluctuations(Common),
    /// Sweep over the (β, γ) grid in the [phase] section.
    PhaseDiagram(Common),
    /// One trajectory of the ring dynamics.
    Dynamics(Common),
    /// Extremal gaps, approximation sums and P(S_n = m) scaling.
    Diagnostics(Common),
    /// Runs the acceptance criteria; exits with 3 if any fails.
    Selftest {
        /// Criteria to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        #[arg(long, env = "ZRP_THREADS")]
        threads: Option<usize>,
        /// Directory for the JSON report.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        cfg.threads = Some(t);
    }
    let out = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    Ok((cfg, out))
}

fn report<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn with_config<T: serde::Serialize + Send>(
    common: &Common,
    f: impl FnOnce(&ExperimentConfig, &Path) -> Result<T> + Send,
) -> Result<T> {
    let (cfg, out) = load(common)?;
    let value = with_threads(cfg.threads, || f(&cfg, &out))??;
    Ok(value)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::CriticalDensity(c) => report(&with_config(&c, commands::critical_density)?),
        Command::Sample { common, weights_kmax } => {
            let s = with_config(&common, |cfg, out| commands::sample(cfg, out, weights_kmax))?;
            report(&s.sizes)
        }
        Command::Condense(c) => report(&with_config(&c, commands::condense)?.sizes),
        Command::Fluctuations(c) => report(&with_config(&c, commands::fluctuations)?.sizes),
        Command::PhaseDiagram(c) => report(&with_config(&c, commands::phase_diagram)?),
        Command::Dynamics(c) => report(&with_config(&c, commands::dynamics)?),
        Command::Diagnostics(c) => {
            let r = with_config(&c, commands::diagnostics)?;
            report(&(&r.mean_log_prob, &r.scaling))
        }
        Command::Selftest { only, threads, out } => {
            let ids: Vec<u8> = if only.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { only };
            let outcomes = with_threads(threads, || {
                let st = Selftest::new();
                ids.iter()
                    .map(|&id| {
                        let o = st.run(id);
                        println!("{}", o.line());
                        o
                    })
                    .collect::<Vec<_>>()
            })?;
            write_json(&out.join("selftest.json"), &outcomes)?;
            let failed = outcomes.iter().filter(|o| !o.pass).count();
            if failed > 0 {
                Err(CliError::Acceptance(failed))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zrp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
