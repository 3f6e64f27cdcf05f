use clap::{Parser, Subcommand};
use std::path::PathBuf;
use vexbv::cli::{Command, ExperimentConfig, ExponentSpec, NormMode};

#[derive(Parser)]
#[command(
    name = "vexbv",
    version,
    about = "Variable-exponent BV laboratory: norms, dual variation, relaxed energies, brackets"
)]
struct Args {
    /// Master seed; all randomness derives from it.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Grid resolution used when a builtin exponent has no function file to
    /// borrow a domain from.
    #[arg(long, global = true, default_value_t = 256)]
    resolution: usize,
    /// CSV destination (stdout when absent).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Cli,
}

#[derive(Subcommand)]
enum Cli {
    /// Log-Hölder constant, strong modulus table and ball constant.
    CheckExponent {
        /// Exponent file or builtin `constant:q` | `ramp:a,b` | `plateau-one:r`.
        exponent: String,
        /// Comma-separated radii for the modulus table.
        #[arg(long)]
        radii: Option<String>,
        #[arg(long, default_value_t = 200)]
        ball_samples: usize,
    },
    /// Certificates for (A0), (A1), (aInc)_{p⁻}, (aDec)_{p⁺}.
    CheckPhi {
        exponent: String,
        /// Constant K in the (A1) ball restriction.
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
    /// Modular, Luxemburg norm, or associate norm of a grid function.
    Norm {
        function: PathBuf,
        exponent: String,
        #[arg(long, conflicts_with_all = ["norm", "associate"])]
        modular: bool,
        #[arg(long, conflicts_with = "associate")]
        norm: bool,
        #[arg(long)]
        associate: bool,
    },
    /// Dual variation and dual modular of a grid function.
    Variation { function: PathBuf, exponent: String },
    /// Relaxed energy breakdown of a piecewise candidate.
    Energy {
        function: PathBuf,
        exponent: String,
        #[arg(long)]
        jumps: Option<PathBuf>,
        /// `euclidean` | `weighted:a11[,a12,a21,a22]` | `smoothed:eps`.
        #[arg(long, default_value = "euclidean")]
        integrand: String,
    },
    /// Mollified upper-bound sweep against the closed-form lower bound.
    Relax {
        function: PathBuf,
        exponent: String,
        #[arg(long)]
        jumps: Option<PathBuf>,
        #[arg(long, default_value = "euclidean")]
        integrand: String,
        /// Comma-separated strictly decreasing radii.
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Variable-exponent ROF denoising.
    Denoise {
        input: PathBuf,
        exponent: String,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 2000)]
        iters: usize,
        /// Output grid-function file.
        #[arg(long)]
        result: PathBuf,
    },
    /// Materialize the built-in fixture corpus.
    Corpus {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Run an experiment described by a `key = value` file.
    Run { config: PathBuf },
}

fn parse_list(text: &str) -> Vec<f64> {
    text.split(',')
        .filter_map(|t| t.trim().parse().ok())
        .collect()
}

fn main() {
    if let Ok(threads) = std::env::var("VEXP_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global()
                .ok();
        }
    }
    let args = Args::parse();
    let config = match args.command {
        Cli::Run { config } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    std::process::exit(1);
                }
            };
            match vexbv::io::parse_key_values(&text)
                .and_then(|map| ExperimentConfig::from_key_values(&map))
            {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    std::process::exit(1);
                }
            }
        }
        other => {
            let command = match other {
                Cli::CheckExponent {
                    exponent,
                    radii,
                    ball_samples,
                } => Command::CheckExponent {
                    exponent: ExponentSpec::parse(&exponent),
                    radii: radii.as_deref().map(parse_list),
                    ball_samples,
                },
                Cli::CheckPhi { exponent, k } => Command::CheckPhi {
                    exponent: ExponentSpec::parse(&exponent),
                    k,
                },
                Cli::Norm {
                    function,
                    exponent,
                    modular,
                    norm,
                    associate,
                } => {
                    let mode = match (modular, norm, associate) {
                        (true, false, false) => NormMode::Modular,
                        (false, false, true) => NormMode::Associate,
                        (false, _, false) => NormMode::Norm,
                        _ => {
                            eprintln!("error: pick one of --modular | --norm | --associate");
                            std::process::exit(1);
                        }
                    };
                    Command::Norm {
                        function,
                        exponent: ExponentSpec::parse(&exponent),
                        mode,
                    }
                }
                Cli::Variation { function, exponent } => Command::Variation {
                    function,
                    exponent: ExponentSpec::parse(&exponent),
                },
                Cli::Energy {
                    function,
                    exponent,
                    jumps,
                    integrand,
                } => Command::Energy {
                    function,
                    jumps,
                    exponent: ExponentSpec::parse(&exponent),
                    integrand,
                },
                Cli::Relax {
                    function,
                    exponent,
                    jumps,
                    integrand,
                    deltas,
                } => Command::Relax {
                    function,
                    jumps,
                    exponent: ExponentSpec::parse(&exponent),
                    integrand,
                    deltas: deltas.as_deref().map(parse_list),
                },
                Cli::Denoise {
                    input,
                    exponent,
                    lambda,
                    eps,
                    iters,
                    result,
                } => Command::Denoise {
                    input,
                    exponent: ExponentSpec::parse(&exponent),
                    lambda,
                    eps,
                    iters,
                    result,
                },
                Cli::Corpus { dir } => Command::Corpus { dir },
                Cli::Run { .. } => unreachable!(),
            };
            ExperimentConfig {
                command,
                seed: args.seed,
                resolution: args.resolution,
                output: args.output,
            }
        }
    };
    std::process::exit(vexbv::cli::run(&config));
}
