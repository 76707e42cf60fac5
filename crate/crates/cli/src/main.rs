use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gmab_cli::commands::{self, AnalyzeArgs, CliError, RunArgs};
use gmab_cli::presets::ScenarioPreset;

#[derive(Parser)]
#[command(
    name = "gmab",
    version,
    about = "Global multi-armed bandit experiments and bound analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write results, bounds, partition and manifest.
    Run(RunCmd),
    /// Report gaps, suboptimality distance, regime constants and bound curves.
    Analyze(AnalyzeCmd),
}

#[derive(Args)]
struct RunCmd {
    /// Bundled scenario.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<ScenarioPreset>,
    /// Experiment configuration file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "GMAB_OUT_DIR", default_value = "gmab-out")]
    out: PathBuf,
    /// Horizon T; resets checkpoints to a log-spaced grid unless --checkpoints is given.
    #[arg(long)]
    horizon: Option<u64>,
    /// Replications R.
    #[arg(long)]
    reps: Option<u64>,
    /// Comma-separated checkpoint steps.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<u64>>,
    /// Replay every episode and check the per-step estimation and regret inequalities.
    #[arg(long)]
    check_lemmas: bool,
}

#[derive(Args)]
struct AnalyzeCmd {
    #[arg(long, conflicts_with_all = ["config", "instance"])]
    preset: Option<ScenarioPreset>,
    /// Experiment configuration file; its instance and parameter are used.
    #[arg(long, conflicts_with = "instance")]
    config: Option<PathBuf>,
    /// Instance description file (JSON).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// True parameter.
    #[arg(long)]
    theta: Option<f64>,
    /// Suboptimality distance, when no instance is given.
    #[arg(long)]
    delta: Option<f64>,
    /// Number of arms, when no instance is given.
    #[arg(long)]
    arms: Option<usize>,
    /// Constants d1,gamma1,d2,gamma2.
    #[arg(long)]
    certificate: Option<String>,
    /// Last step of the bound curves.
    #[arg(long, default_value_t = 100_000)]
    horizon: u64,
    #[arg(long, env = "GMAB_OUT_DIR", default_value = "gmab-out")]
    out: PathBuf,
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(c) => {
            let args = RunArgs {
                preset: c.preset,
                config: c.config,
                seed: c.seed,
                out: c.out,
                horizon: c.horizon,
                reps: c.reps,
                checkpoints: c.checkpoints,
                check_lemmas: c.check_lemmas,
            };
            let m = commands::run(&args)?;
            println!(
                "wrote {} files and {} to {} in {:.2}s",
                m.files.len(),
                gmab_cli::export::MANIFEST_JSON,
                args.out.display(),
                m.elapsed_secs
            );
            if let Some(l) = &m.lemmas {
                println!(
                    "lemma checks: {} violations over {} steps ({} episodes, {} skipped)",
                    l.violations, l.steps_checked, l.episodes, l.skipped
                );
            }
            if let Some(budget) = m.budget_secs {
                if m.elapsed_secs > budget as f64 {
                    eprintln!("warning: run took {:.1}s, over the {budget}s budget", m.elapsed_secs);
                }
            }
        }
        Command::Analyze(c) => {
            let certificate = c.certificate.as_deref().map(commands::parse_certificate).transpose()?;
            let args = AnalyzeArgs {
                preset: c.preset,
                config: c.config,
                instance: c.instance,
                theta: c.theta,
                delta: c.delta,
                arms: c.arms,
                certificate,
                horizon: c.horizon,
                out: c.out,
            };
            let m = commands::analyze(&args)?;
            println!("wrote {} files to {}", m.files.len(), args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gmab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
