//! `qnpg`: config-driven experiment runner.
//!
//! Every verb that writes a CSV also writes `<out>.meta` with the resolved
//! config, tool version and master seed. Without `--out` the CSV goes to
//! stdout and no sidecar is written.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qnpg_core::experiments::{
    run_compare, run_landscape, run_trajectory, threshold_table, write_meta, write_text, CsvTable, THRESHOLDS,
};
use qnpg_core::{
    exact_expected_reward, parity_optimum, BanditEnv, CircuitTemplate, ExperimentConfig, ExperimentKind, Fixture,
    OptimalRule,
};

#[derive(Parser)]
#[command(name = "qnpg", version, about = "Quantum natural policy gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-seed logs to `<out stem>.raw.csv` (compare only).
    #[arg(long)]
    raw: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train every agent on every seed and write mean/band curves.
    Compare(RunArgs),
    /// Exact expected reward over a grid of a 2-parameter ansatz.
    Landscape(RunArgs),
    /// Parameter trajectories of each agent from one starting point.
    Trajectory(RunArgs),
    /// Share of states whose optimal-action probability clears each threshold.
    Table(RunArgs),
    /// Print the per-batch circuit budget of each configured agent.
    Budget {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the closed-form optimum of the parity ansatz as a fixture file.
    Fixture {
        #[arg(long)]
        n_qubits: usize,
        /// Use the entanglement-free variant.
        #[arg(long)]
        product: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Required exact expected reward for a fixture to be written.
const FIXTURE_TOLERANCE: f64 = 0.999;

fn load(args: &RunArgs, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.master_seed = seed;
        config.trainer.seed = seed;
    }
    config.kind = kind;
    Ok(config)
}

fn emit(table: &CsvTable, config: &ExperimentConfig, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            table
                .write(path)
                .with_context(|| format!("writing {}", path.display()))?;
            write_meta(path, config, &[("rows", table.rows.len().to_string())])?;
            eprintln!("wrote {} ({} rows)", path.display(), table.rows.len());
        }
        None => print!("{}", table.render()),
    }
    Ok(())
}

fn raw_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    out.with_file_name(format!("{stem}.raw.csv"))
}

fn compare(args: &RunArgs) -> Result<()> {
    let config = load(args, ExperimentKind::Compare)?;
    let result = run_compare(&config)?;
    emit(&result.summary_table(), &config, args.out.as_deref())?;
    if args.raw {
        let Some(out) = args.out.as_deref() else {
            bail!("--raw needs --out");
        };
        let path = raw_path(out);
        result
            .raw_table()
            .write(&path)
            .with_context(|| format!("writing {} (summary already written)", path.display()))?;
        eprintln!("wrote {}", path.display());
    }
    for c in &result.curves {
        eprintln!("{:>20}: final mean <r> = {:.4}", c.agent.name(), c.final_mean());
    }
    Ok(())
}

fn table(args: &RunArgs) -> Result<()> {
    let config = load(args, ExperimentKind::Table)?;
    let template = config.template()?;
    let theta = config.table_theta(&template)?;
    let env = BanditEnv::new(template.n_qubits(), config.env_rule, config.master_seed)?;
    let t = threshold_table(&template, &env, &theta, &THRESHOLDS)?;
    emit(&t.to_csv(template.name()), &config, args.out.as_deref())
}

fn budget(path: &Path) -> Result<()> {
    let config = ExperimentConfig::load(path)?;
    let template = config.template()?;
    println!("agent,policy_circuits,gradient_circuits,metric_circuits,total");
    for agent in &config.agents {
        let tc = agent.configure(&config.trainer, config.metric_mode, config.regularization);
        let b = tc.budget(&template)?;
        println!(
            "{},{},{},{},{}",
            agent.name(),
            b.policy_circuits,
            b.gradient_circuits,
            b.metric_circuits,
            b.total
        );
    }
    Ok(())
}

fn fixture(n_qubits: usize, product: bool, out: &Path) -> Result<()> {
    let template = CircuitTemplate::parity(n_qubits, !product)?;
    let angles = parity_optimum(n_qubits, !product);
    let env = BanditEnv::new(n_qubits, OptimalRule::Parity, 0)?;
    let reward = exact_expected_reward(&template, &env, &angles, None)?;
    if reward < FIXTURE_TOLERANCE {
        bail!("closed-form optimum only reaches <r> = {reward}");
    }
    let f = Fixture {
        template: template.name().to_string(),
        angles,
    };
    write_text(out, &f.render(reward, FIXTURE_TOLERANCE))?;
    eprintln!("wrote {} (<r> = {reward:.12})", out.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Compare(args) => compare(&args),
        Command::Landscape(args) => {
            let config = load(&args, ExperimentKind::Landscape)?;
            let (_, table) = run_landscape(&config)?;
            emit(&table, &config, args.out.as_deref())
        }
        Command::Trajectory(args) => {
            let config = load(&args, ExperimentKind::Trajectory)?;
            let (_, table) = run_trajectory(&config)?;
            emit(&table, &config, args.out.as_deref())
        }
        Command::Table(args) => table(&args),
        Command::Budget { config } => budget(&config),
        Command::Fixture {
            n_qubits,
            product,
            out,
        } => fixture(n_qubits, product, &out),
    }
}
