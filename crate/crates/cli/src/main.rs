use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use cosegloc_core::harness::{generate, run, BaselineMode, LabelingFile, SynthConfig};
use cosegloc_core::{brute_force, build_matrices, parse_instance, Error, Hyperparams, MetricsReport, SolverConfig};

#[derive(Parser)]
#[command(
    name = "cosegloc",
    version,
    about = "Joint box colocalization and superpixel cosegmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance with the joint program or one of the baselines.
    Solve {
        #[arg(long, value_parser = parse_mode)]
        mode: BaselineMode,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Primal and dual residual tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a planted synthetic instance described by a JSON config.
    Gen {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a labeling file against an instance's ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Exact integer optimum by exhaustive search (small instances only).
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta_s: Option<f64>,
    #[arg(long)]
    beta_b: Option<f64>,
    /// Minimum foreground pixel fraction for b2.
    #[arg(long)]
    fraction: Option<f64>,
    /// Per-image foreground pixel fraction bounds for b1 and b3, as `lo,hi`.
    #[arg(long, value_parser = parse_bounds)]
    fg_bounds: Option<(f64, f64)>,
}

impl ParamArgs {
    fn hyperparams(&self) -> Hyperparams {
        let mut hp = Hyperparams::default();
        let fields = [
            (self.alpha, &mut hp.alpha),
            (self.nu, &mut hp.nu),
            (self.mu, &mut hp.mu),
            (self.gamma, &mut hp.gamma),
            (self.beta_s, &mut hp.beta_s),
            (self.beta_b, &mut hp.beta_b),
            (self.fraction, &mut hp.baseline_fraction),
        ];
        for (arg, field) in fields {
            if let Some(v) = arg {
                *field = v;
            }
        }
        if let Some(bounds) = self.fg_bounds {
            hp.fg_bounds = bounds;
        }
        hp
    }
}

fn parse_mode(s: &str) -> Result<BaselineMode, String> {
    s.parse::<BaselineMode>().map_err(|e| e.to_string())
}

fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected two numbers as lo,hi")?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

fn read_instance(path: &Path) -> anyhow::Result<cosegloc_core::InstanceSet> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&bytes).with_context(|| format!("loading instance {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Solve {
            mode,
            instance,
            out,
            params,
            tol,
            seed,
        } => {
            let set = read_instance(&instance)?;
            let hp = params.hyperparams();
            let mut cfg = SolverConfig::default();
            if let Some(tol) = tol {
                cfg.tol_primal = tol;
                cfg.tol_dual = tol;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let result = run(mode, &set, &hp, &cfg)?;
            let mut file = LabelingFile::new(mode.as_str(), &result.labeling, result.metrics);
            if let Some(sol) = &result.solution {
                file.status = Some(sol.status.to_string());
                file.iterations = Some(sol.iterations);
                eprintln!(
                    "{mode}: {} after {} iterations, relaxed objective {:.6e}",
                    sol.status, sol.iterations, sol.objective
                );
            }
            write(&out, &file.to_json())
        }
        Command::Gen { config, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg: SynthConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", config.display()))?;
            let set = generate(&cfg)?;
            write(&out, &set.to_json())
        }
        Command::Eval { pred, instance } => {
            let set = read_instance(&instance)?;
            let bytes = std::fs::read(&pred).with_context(|| format!("reading {}", pred.display()))?;
            let file = LabelingFile::parse(&bytes).with_context(|| format!("loading labeling {}", pred.display()))?;
            if file.images.len() != set.images.len() {
                bail!(
                    "labeling has {} images, instance has {}",
                    file.images.len(),
                    set.images.len()
                );
            }
            let mut report = MetricsReport::evaluate(&file.labeling(), &set);
            report.objective = file.metrics.objective;
            report.relaxed_objective = file.metrics.relaxed_objective;
            report.gap = file.metrics.gap;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Oracle { instance, out, params } => {
            let set = read_instance(&instance)?;
            let hp = params.hyperparams();
            hp.validate().into_result()?;
            let mats = build_matrices(&set, &hp)?;
            let exact = brute_force(&set, &mats, &hp)?;
            let mut metrics = MetricsReport::evaluate(&exact.labeling, &set);
            metrics.objective = Some(exact.objective);
            eprintln!(
                "oracle: objective {:.6e} over {} feasible assignments",
                exact.objective, exact.feasible_count
            );
            write(&out, &LabelingFile::new("oracle", &exact.labeling, metrics).to_json())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Infeasible(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
