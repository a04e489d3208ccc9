use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use nnfd::shallow_net::ShallowNet;
use nnfd::training::TrainReport;
use nnfd_bench::config::{Experiment, ExperimentConfig, ExperimentKind, STOKES_PRESET};
use nnfd_bench::run::{self, TrainedNet};
use nnfd_bench::validate;

#[derive(Parser)]
#[command(name = "nnfd", version, about = "Shallow-network / fast-Poisson interface solver benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run a built-in preset instead of a config file.
    #[arg(long, global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Train a fresh net for every grid.
    #[arg(long, global = true)]
    retrain: bool,
    /// Write u, v, w per grid point under OUT/fields.
    #[arg(long, global = true)]
    dump_fields: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the network and save it with its loss history.
    Train,
    /// Solve on one grid, writing the fields.
    Solve {
        /// Cells per axis; defaults to the finest grid of the sweep.
        #[arg(long)]
        n: Option<usize>,
        /// Use a saved net instead of training.
        #[arg(long)]
        net: Option<PathBuf>,
    },
    /// Grid sweep with error table.
    Converge,
    /// Grid sweep of the Stokes benchmark.
    Stokes,
    /// Run the oracle suites.
    Validate,
}

fn experiment(cli: &Cli, default_preset: Option<&str>) -> Result<Experiment> {
    let mut cfg = match (&cli.config, &cli.preset, default_preset) {
        (Some(path), _, _) => ExperimentConfig::load(path)?,
        (None, Some(name), _) => ExperimentConfig::for_preset(name, 0),
        (None, None, Some(name)) => ExperimentConfig::for_preset(name, 0),
        (None, None, None) => bail!("pass --config PATH or --preset NAME"),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.retrain |= cli.retrain;
    cfg.dump_fields |= cli.dump_fields;
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    cfg.resolve()
}

fn converge(exp: &Experiment) -> Result<()> {
    let out = run::run(exp)?;
    run::write_artifacts(exp, &out)?;
    print!("{}", out.table.to_csv());
    for (_, tn) in &out.nets {
        if !tn.report.converged {
            eprintln!(
                "warning: training stopped at loss {:e} after {} epochs",
                tn.report.final_loss, tn.report.epochs_used
            );
        }
    }
    eprintln!("wrote {}", exp.out.display());
    Ok(())
}

fn main_inner(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Train => {
            let exp = experiment(cli, None)?;
            let tn = run::train(&exp, exp.lm.seed)?;
            run::save_net(&exp.out, "", &tn)?;
            println!(
                "loss {:e} after {} epochs ({}converged), {:.2} s",
                tn.report.final_loss,
                tn.report.epochs_used,
                if tn.report.converged { "" } else { "not " },
                tn.seconds
            );
        }
        Command::Solve { n, net } => {
            let exp = experiment(cli, None)?;
            let tn = match net {
                Some(path) => {
                    let net = ShallowNet::load(path).with_context(|| format!("loading {}", path.display()))?;
                    // Loss of a loaded net is unknown.
                    let report = TrainReport { final_loss: f64::NAN, epochs_used: 0, loss_history: vec![], converged: false };
                    TrainedNet { net, report, seconds: 0.0 }
                }
                None => run::train(&exp, exp.lm.seed)?,
            };
            let n = n.unwrap_or(*exp.grids.last().expect("non-empty sweep"));
            match run::solve_once(&exp, &tn, n)? {
                Some(errors) => {
                    let names: &[&str] = match exp.kind {
                        ExperimentKind::Poisson(_) => &run::POISSON_QUANTITIES,
                        ExperimentKind::Stokes(_) => &run::STOKES_QUANTITIES,
                    };
                    for (q, e) in names.iter().zip(errors) {
                        println!("err_{q} {}", nnfd::convergence::format_e16(e));
                    }
                }
                None => println!("solved n = {n} (no closed-form solution)"),
            }
        }
        Command::Converge => converge(&experiment(cli, None)?)?,
        Command::Stokes => {
            let exp = experiment(cli, Some(STOKES_PRESET))?;
            if !matches!(exp.kind, ExperimentKind::Stokes(_)) {
                bail!("`stokes` needs the `{STOKES_PRESET}` preset");
            }
            converge(&exp)?;
        }
        Command::Validate => {
            let checks = validate::run_all();
            for c in &checks {
                println!("{c}");
            }
            if checks.iter().any(|c| !c.passed()) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
