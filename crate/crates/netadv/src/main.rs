use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netadv::commands::{self, PipelineOptions, TargetSpec};
use netadv::render::parse_formats;
use netadv::{Error, Result};
use netadv_core::models::ModelKind;

/// Adversarial examples against network intrusion classifiers, with
/// network-domain validity checks.
#[derive(Parser)]
#[command(name = "netadv", version, args_conflicts_with_subcommands = true)]
struct Cli {
    /// Rerun the step recorded in a run manifest.
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse or generate records, split and encode them.
    Prepare {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = commands::DEFAULT_TEST_FRACTION)]
        test_fraction: f64,
    },
    /// Derive a constraint file from a prepared dataset.
    Derive {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "constraints.json")]
        out: PathBuf,
    },
    /// Train a model and print its test metrics.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// JSON object of hyperparameters; omitted fields take defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed of the MLP or forest config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Attack malicious test samples with a surrogate model.
    Attack {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// JSON list of attack configs; all seven attacks by default.
        #[arg(long)]
        attacks: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = commands::DEFAULT_ATTACK_LIMIT)]
        limit: usize,
    },
    /// Validity, severity and transferability report for attack batches.
    Evaluate {
        #[arg(long)]
        batches: PathBuf,
        #[arg(long)]
        constraints: PathBuf,
        /// Model files, optionally as NAME=PATH.
        #[arg(long, num_args = 1.., required = true)]
        targets: Vec<String>,
        #[arg(long, default_value = "report.json")]
        out: PathBuf,
        /// Extra formats: csv, markdown, svg.
        #[arg(long, default_value = "")]
        render: String,
    },
    /// Run prepare, derive, train, attack and evaluate with one seed.
    Pipeline {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        attacks: Option<PathBuf>,
        #[arg(long, default_value_t = commands::DEFAULT_ATTACK_LIMIT)]
        limit: usize,
        #[arg(long, default_value = "csv,markdown,svg")]
        render: String,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct Source {
    /// NSL-KDD file (comma-separated, no header).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generate this many synthetic records instead.
    #[arg(long)]
    synthetic: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mlp,
    Knn,
    Tree,
    Forest,
    Svm,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Mlp => ModelKind::Mlp,
            ModelArg::Knn => ModelKind::Knn,
            ModelArg::Tree => ModelKind::Tree,
            ModelArg::Forest => ModelKind::Forest,
            ModelArg::Svm => ModelKind::Svm,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(path) = cli.manifest {
        return commands::replay(&path);
    }
    let Some(command) = cli.command else {
        return Err(Error::Usage(
            "a subcommand or --manifest is required (see --help)".into(),
        ));
    };
    match command {
        Command::Prepare {
            source,
            out,
            seed,
            test_fraction,
        } => {
            commands::prepare(&commands::PrepareOptions {
                input: source.input,
                synthetic: source.synthetic,
                out,
                seed,
                test_fraction,
            })?;
        }
        Command::Derive { data, out } => commands::derive(&commands::DeriveOptions { data, out })?,
        Command::Train {
            data,
            model,
            config,
            out,
            seed,
        } => {
            let hyperparameters = commands::resolve_hyperparameters(model.into(), config.as_deref(), seed)?;
            let (model, metrics) = commands::train(&commands::TrainOptions {
                data,
                config,
                out,
                hyperparameters,
            })?;
            println!("{}", commands::metrics_line(&model, &metrics));
        }
        Command::Attack {
            model,
            data,
            attacks,
            out,
            seed,
            limit,
        } => {
            let configs = commands::resolve_attack_configs(attacks.as_deref(), seed)?;
            commands::attack(&commands::AttackOptions {
                model,
                data,
                attacks,
                out,
                seed,
                limit,
                configs,
            })?;
        }
        Command::Evaluate {
            batches,
            constraints,
            targets,
            out,
            render,
        } => {
            commands::evaluate(&commands::EvaluateOptions {
                batches,
                constraints,
                targets: targets.iter().map(|t| TargetSpec::parse(t)).collect(),
                out,
                render: parse_formats(&render)?,
            })?;
        }
        Command::Pipeline {
            source,
            out,
            seed,
            attacks,
            limit,
            render,
        } => {
            let mut opts = PipelineOptions::new(out, seed);
            if source.input.is_some() {
                opts.synthetic = None;
                opts.input = source.input;
            } else if let Some(n) = source.synthetic {
                opts.synthetic = Some(n);
            }
            opts.configs = commands::resolve_attack_configs(attacks.as_deref(), seed)?;
            opts.attacks = attacks;
            opts.limit = limit;
            opts.render = parse_formats(&render)?;
            commands::pipeline(&opts)?;
            log::info!("report written to {}", opts.report_path().display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_target(false)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
