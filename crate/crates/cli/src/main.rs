//! `bpdiff` — marginal inference by belief-propagation diffusion.
//!
//! Results go to stdout (or `-o` files); diagnostics go to stderr.
//! Exit codes: 0 success, 1 validation error, 2 divergence in `solve`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use bpdiff_core::{
    bench, load_model, run, Algorithm, BeliefDocument, BenchSpec, DiffusionConfig, Model,
    ModelDocument, Oracle,
};

#[derive(Parser)]
#[command(
    name = "bpdiff",
    version,
    about = "Belief propagation as discrete diffusion on intersection-closed hypergraphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AlgorithmArg {
    Gbp,
    Bethe,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Gbp => Algorithm::Gbp,
            AlgorithmArg::Bethe => Algorithm::Bethe,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Print the intersection closure of a model's faces with Bethe numbers.
    Closure {
        model: PathBuf,
        /// Write the closed face list as JSON instead of printing it.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a diffusion from the model's potential and emit final beliefs.
    Solve {
        model: PathBuf,
        #[arg(long, value_enum)]
        algorithm: AlgorithmArg,
        /// Diffusivity (Euler step size).
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Residual tolerance on the flux sup norm.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Load the face list as given instead of closing it.
        #[arg(long)]
        no_closure: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Exact marginals, partition function and free energy by brute force.
    Oracle {
        model: PathBuf,
        #[arg(long)]
        no_closure: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Report the marginal-consistency residual and normalization error of
    /// a belief document against a model.
    Check {
        model: PathBuf,
        beliefs: PathBuf,
        #[arg(long)]
        no_closure: bool,
    },
    /// Convergence sweep over diffusivities and temperatures.
    Bench {
        /// Built-in nerve preset.
        #[arg(long, default_value = "horn2", conflicts_with = "model")]
        preset: String,
        /// Sweep a custom model file instead of a preset.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        eps: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        temp: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed_base: u64,
        #[arg(long, default_value_t = 10)]
        iters: usize,
        /// Decay-ratio threshold under which a run counts as converged.
        #[arg(long, default_value_t = bpdiff_core::bench::DEFAULT_DECAY_TOLERANCE)]
        tol: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: TableFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn read_model(path: &Path, apply_closure: bool) -> bpdiff_core::Result<Model> {
    let doc = ModelDocument::load(path)?;
    load_model(&doc, apply_closure)
}

fn emit(text: &str, output: Option<&Path>) -> bpdiff_core::Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None if text.ends_with('\n') => print!("{text}"),
        None => println!("{text}"),
    }
    Ok(())
}

fn execute(command: Command) -> bpdiff_core::Result<ExitCode> {
    match command {
        Command::Closure { model, output } => {
            let model = read_model(&model, true)?;
            let nerve = model.nerve();
            match output {
                Some(path) => {
                    let faces: Vec<Vec<u32>> = nerve
                        .faces()
                        .iter()
                        .map(|f| f.vertices().to_vec())
                        .collect();
                    let bethe: std::collections::BTreeMap<String, i64> = nerve
                        .faces()
                        .iter()
                        .zip(nerve.bethe_numbers())
                        .map(|(f, &c)| (f.key(), c))
                        .collect();
                    let doc = serde_json::json!({ "faces": faces, "bethe": bethe });
                    std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
                }
                None => {
                    println!("face\tbethe");
                    for (face, c) in nerve.faces().iter().zip(nerve.bethe_numbers()) {
                        println!("{}\t{:+}", face.key(), c);
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            model,
            algorithm,
            eps,
            iters,
            tol,
            no_closure,
            output,
        } => {
            let model = read_model(&model, !no_closure)?;
            let mut config = DiffusionConfig::new(algorithm.into(), eps, iters);
            config.residual_tolerance = tol;
            let report = run(&model, &config)?;
            eprintln!(
                "{}: {} after {} iterations; residual {:.3e} -> {:.3e} (decay {:.3e})",
                report.algorithm,
                if report.converged {
                    "converged"
                } else if report.diverged {
                    "diverged"
                } else {
                    "stopped"
                },
                report.iterations_run,
                report.residual_initial,
                report.residual_final,
                report.decay_ratio,
            );
            let doc = BeliefDocument::from_field(&model, report.final_beliefs.field())?;
            emit(&doc.to_json()?, output.as_deref())?;
            if report.diverged {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle {
            model,
            no_closure,
            output,
        } => {
            let model = read_model(&model, !no_closure)?;
            let oracle = Oracle::new(model.context());
            let marginals = oracle.true_marginals(model.potential())?;
            let log_z = oracle.log_partition(model.potential())?;
            eprintln!("ln Z = {log_z:.12}; free energy = {:.12}", -log_z);
            let mut doc = BeliefDocument::from_field(&model, marginals.field())?;
            doc.log_partition = Some(log_z);
            doc.free_energy = Some(-log_z);
            emit(&doc.to_json()?, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            model,
            beliefs,
            no_closure,
        } => {
            let model = read_model(&model, !no_closure)?;
            let doc = BeliefDocument::load(&beliefs)?;
            let field = doc.to_field(&model)?;
            let ctx = model.context();
            let d_residual = ctx.differential(&field)?.sup_norm();
            let normalization = field
                .tensors()
                .iter()
                .map(|t| (t.values().iter().sum::<f64>() - 1.0).abs())
                .fold(0.0f64, f64::max);
            println!("d_residual\t{d_residual:e}");
            println!("normalization_error\t{normalization:e}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            preset,
            model,
            eps,
            temp,
            seeds,
            seed_base,
            iters,
            tol,
            format,
            output,
        } => {
            let model = match model {
                Some(path) => read_model(&path, true)?,
                None => match preset.as_str() {
                    "horn2" => Model::horn2(),
                    other => {
                        return Err(bpdiff_core::Error::InvalidParameter(format!(
                            "unknown preset {other:?}, expected \"horn2\""
                        )))
                    }
                },
            };
            let spec = BenchSpec {
                temperatures: temp.unwrap_or_else(bpdiff_core::bench::default_temperatures),
                diffusivities: eps.unwrap_or_else(bpdiff_core::bench::default_diffusivities),
                seeds,
                seed_base,
                iterations: iters,
                tolerance: tol,
            };
            let table = bench(&model, &spec)?;
            let text = match format {
                TableFormat::Csv => table.to_csv(),
                TableFormat::Md => table.to_markdown(),
            };
            emit(&text, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
