use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ethics2vec::{AuditMethod, SlopeForm};
use ethics_audit::commands;
use ethics_audit::{CliError, Config, Result};

#[derive(Parser)]
#[command(name = "ethics-audit", version, about = "Recover the implicit loss weights of decision agents")]
struct Cli {
    /// Override the seed of every experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Slope estimation for binary audits.
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    /// Directory receiving reports and data files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// TOML configuration file (see `print-config`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Parametric,
    Nonparametric,
}

#[derive(Clone, Copy, ValueEnum)]
enum SlopeFormArg {
    Exact,
    DensityRatio,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the FP/FN loss ratio of an agent from a score,action,truth log.
    AuditBinary {
        log: PathBuf,
        #[arg(long)]
        agent_id: Option<String>,
        /// Also write the empirical ROC curve (tau,fpr,tpr).
        #[arg(long)]
        emit_roc: Option<PathBuf>,
        /// Window half-width for the nonparametric slope.
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long, value_enum)]
        slope_form: Option<SlopeFormArg>,
    },
    /// Run the loss-ratio recovery experiment over all configured agents.
    ExperimentBinary,
    /// Profile the car control-law family.
    ExperimentCar {
        /// Write the per-step trace of this law (repeatable).
        #[arg(long)]
        emit_trace: Vec<usize>,
        /// Profile a recorded t,x,u trajectory instead of the law family.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Write the trajectories of the car control laws.
    SimulateCar {
        #[arg(long)]
        law: Option<usize>,
    },
    /// Print the full default (or resolved) configuration.
    PrintConfig,
}

fn resolve(cli: &Cli) -> Result<Config> {
    let mut config = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.binary.seed = seed;
        config.car.seed = seed;
    }
    if let Some(method) = cli.method {
        if matches!(cli.command, Command::ExperimentCar { .. } | Command::SimulateCar { .. }) {
            return Err(CliError::Usage("--method applies to binary audits only".into()));
        }
        config.audit.method = match method {
            MethodArg::Parametric => AuditMethod::Parametric,
            MethodArg::Nonparametric => AuditMethod::Nonparametric,
        };
    }
    if let Command::AuditBinary { bandwidth, slope_form, .. } = &cli.command {
        if let Some(bw) = bandwidth {
            config.audit.bandwidth = Some(*bw);
        }
        if let Some(form) = slope_form {
            config.audit.slope_form = match form {
                SlopeFormArg::Exact => SlopeForm::Exact,
                SlopeFormArg::DensityRatio => SlopeForm::DensityRatio,
            };
        }
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    let config = resolve(&cli)?;
    if cli.print_config || matches!(cli.command, Command::PrintConfig) {
        print!("{}", config.to_toml());
        return Ok(());
    }
    let out_dir = &cli.out_dir;
    match &cli.command {
        Command::AuditBinary { log, agent_id, emit_roc, .. } => {
            let report = commands::cmd_audit_binary(log, agent_id.as_deref(), emit_roc.as_deref(), &config, out_dir)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Command::ExperimentBinary => {
            let output = commands::cmd_experiment_binary(&config, out_dir)?;
            println!("agent  true_ratio  recovered_ratio  rel_error");
            for r in &output.rows {
                let rel = (r.audit.recovered_ratio - r.true_ratio) / r.true_ratio;
                println!("{:>5}  {:>10.2}  {:>15.4}  {:>+9.4}", r.index + 1, r.true_ratio, r.audit.recovered_ratio, rel);
            }
            println!(
                "pearson={:.6} max_relative_error={:.4}",
                output.summary.pearson, output.summary.max_relative_error
            );
        }
        Command::ExperimentCar { emit_trace, trajectory: Some(path) } => {
            if !emit_trace.is_empty() {
                return Err(CliError::Usage("--emit-trace cannot be combined with --trajectory".into()));
            }
            let report = commands::cmd_profile_trajectory(&config, path, out_dir)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Command::ExperimentCar { emit_trace, trajectory: None } => {
            let output = commands::cmd_experiment_car(&config, out_dir, emit_trace)?;
            println!("law           E1            E2   w1/w2 (ratio of sums)");
            for r in &output.laws {
                println!("{:>3}  {:>12.6e}  {:>12.6e}  {:>10.4}", r.id, r.aggregate[0], r.aggregate[1], r.ratio_of_sums);
            }
        }
        Command::SimulateCar { law } => {
            for path in commands::cmd_simulate_car(&config, *law, out_dir)? {
                println!("{}", path.display());
            }
        }
        Command::PrintConfig => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if let Some(hint) = err.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
