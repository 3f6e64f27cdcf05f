//! Experiment runner: subcommand dispatch, CSV emission, deterministic
//! seeding.  The same `ExperimentConfig` is reachable from command-line flags
//! or from a line-oriented `key = value` file (`vexbv run experiment.txt`),
//! and identical configs produce byte-identical CSV.

use crate::corpus;
use crate::denoise::{denoise, DenoiseProblem};
use crate::energy::relaxed_energy;
use crate::error::{Error, Result};
use crate::exponent::{log_holder_report, ExponentField};
use crate::grid::{GridDomain, Mat};
use crate::integrand::Integrand;
use crate::modular::{associate_norm, luxemburg_norm, modular};
use crate::phi::{check_a0, check_a1, check_a_dec, check_a_inc, PhiFunction};
use crate::relax::{default_delta_list, upper_sequence};
use crate::variation::{dual_modular, dual_variation, PiecewiseBvFunction};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Exponent input: a grid-function file (`m = 1`) or a builtin pattern
/// `constant:q`, `ramp:a,b`, `plateau-one:radius`.
#[derive(Debug, Clone)]
pub enum ExponentSpec {
    File(PathBuf),
    Builtin(String),
}

impl ExponentSpec {
    pub fn parse(s: &str) -> Self {
        let builtin = ["constant:", "ramp:", "plateau-one:"];
        if builtin.iter().any(|p| s.starts_with(p)) {
            Self::Builtin(s.to_string())
        } else {
            Self::File(PathBuf::from(s))
        }
    }

    /// Resolve against a domain (from an input function) or, failing that,
    /// the default 1D lab domain `(−1, 1)` at the configured resolution.
    pub fn resolve(&self, domain: Option<&GridDomain>, resolution: usize) -> Result<ExponentField> {
        match self {
            Self::File(path) => {
                let g = crate::io::read_grid_function(path)?;
                if let Some(dom) = domain {
                    if g.domain() != dom {
                        return Err(Error::DimMismatch(
                            "exponent grid differs from the function grid".into(),
                        ));
                    }
                }
                ExponentField::new(g)
            }
            Self::Builtin(text) => {
                let fallback;
                let dom = match domain {
                    Some(d) => d,
                    None => {
                        fallback = GridDomain::line(-1.0, 1.0, resolution)?;
                        &fallback
                    }
                };
                builtin_exponent(text, dom)
            }
        }
    }
}

fn builtin_exponent(text: &str, dom: &GridDomain) -> Result<ExponentField> {
    let (kind, args) = text
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("bad exponent spec {text:?}")))?;
    let nums: Result<Vec<f64>> = args
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("exponent spec {text:?}: {e}")))
        })
        .collect();
    let nums = nums?;
    match (kind, nums.as_slice()) {
        ("constant", [q]) => ExponentField::constant(dom, *q),
        ("ramp", [a, b]) => {
            let (x0, x1) = dom.extent(0);
            let (a, b) = (*a, *b);
            ExponentField::from_fn(dom, move |x| a + (b - a) * (x[0] - x0) / (x1 - x0))
        }
        ("plateau-one", [radius]) => {
            let r = *radius;
            if r <= 0.0 {
                return Err(Error::Config("plateau radius must be positive".into()));
            }
            let dim = dom.dim();
            let mut center = [0.0; 2];
            for (k, c) in center.iter_mut().enumerate().take(dim) {
                let (lo, hi) = dom.extent(k);
                *c = 0.5 * (lo + hi);
            }
            ExponentField::from_fn(dom, move |x| {
                let d = (0..dim)
                    .map(|k| (x[k] - center[k]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                1.0 + ((d - r) / r).clamp(0.0, 1.0)
            })
        }
        _ => Err(Error::Config(format!("bad exponent spec {text:?}"))),
    }
}

/// Integrand selection: `euclidean`, `weighted:a11[,a12,a21,a22]`,
/// `smoothed:eps`.
pub fn parse_integrand(text: &str) -> Result<Integrand> {
    if text == "euclidean" {
        return Ok(Integrand::euclidean());
    }
    let (kind, args) = text
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("bad integrand spec {text:?}")))?;
    let nums: Result<Vec<f64>> = args
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("integrand spec {text:?}: {e}")))
        })
        .collect();
    let nums = nums?;
    match (kind, nums.as_slice()) {
        ("weighted", [c]) => Integrand::weighted(Mat::from_slice(1, 1, &[*c])),
        ("weighted", m @ [_, _, _, _]) => Integrand::weighted(Mat::from_slice(2, 2, m)),
        ("smoothed", [eps]) => Integrand::smoothed(*eps),
        _ => Err(Error::Config(format!("bad integrand spec {text:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMode {
    Modular,
    Norm,
    Associate,
}

#[derive(Debug, Clone)]
pub enum Command {
    CheckExponent {
        exponent: ExponentSpec,
        radii: Option<Vec<f64>>,
        ball_samples: usize,
    },
    CheckPhi {
        exponent: ExponentSpec,
        k: f64,
    },
    Norm {
        function: PathBuf,
        exponent: ExponentSpec,
        mode: NormMode,
    },
    Variation {
        function: PathBuf,
        exponent: ExponentSpec,
    },
    Energy {
        function: PathBuf,
        jumps: Option<PathBuf>,
        exponent: ExponentSpec,
        integrand: String,
    },
    Relax {
        function: PathBuf,
        jumps: Option<PathBuf>,
        exponent: ExponentSpec,
        integrand: String,
        deltas: Option<Vec<f64>>,
    },
    Denoise {
        input: PathBuf,
        exponent: ExponentSpec,
        lambda: f64,
        eps: Option<f64>,
        iters: usize,
        result: PathBuf,
    },
    Corpus {
        dir: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub resolution: usize,
    /// CSV destination; `None` prints to stdout.
    pub output: Option<PathBuf>,
}

/// What a subcommand produced: the CSV payload, a one-line summary, and
/// whether a numerical-failure flag (non-convergence) was raised.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv: String,
    pub summary: String,
    pub numerical_flag: bool,
}

fn read_candidate(function: &Path, jumps: &Option<PathBuf>) -> Result<PiecewiseBvFunction> {
    let smooth = crate::io::read_grid_function(function)?;
    let jump_sets = match jumps {
        None => Vec::new(),
        Some(path) => crate::io::read_jump_sets(path, smooth.domain(), smooth.codim())?,
    };
    PiecewiseBvFunction::new(smooth, jump_sets)
}

pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome> {
    match &config.command {
        Command::CheckExponent {
            exponent,
            radii,
            ball_samples,
        } => {
            let p = exponent.resolve(None, config.resolution)?;
            let radii = radii.clone().unwrap_or_else(|| {
                let d = p.domain().diameter();
                (1..=4).map(|k| d / (4.0 * (1 << k) as f64) * 2.0).collect()
            });
            let report = log_holder_report(&p, &radii, *ball_samples, config.seed);
            let mut header = String::from("C_logHolder");
            let mut row = format!("{}", report.constant);
            for (r, w) in &report.strong_modulus {
                write!(header, ",omega({r})").unwrap();
                write!(row, ",{w}").unwrap();
            }
            if report.strong_modulus.is_empty() {
                for r in &radii {
                    write!(header, ",omega({r})").unwrap();
                    write!(row, ",0").unwrap();
                }
            }
            header.push_str(",ballConstant");
            write!(row, ",{}", report.ball_constant).unwrap();
            Ok(RunOutcome {
                csv: format!("{header}\n{row}\n"),
                summary: format!(
                    "log-Hölder constant {} | ball constant {}",
                    report.constant, report.ball_constant
                ),
                numerical_flag: false,
            })
        }
        Command::CheckPhi { exponent, k } => {
            let p = exponent.resolve(None, config.resolution)?;
            let phi = PhiFunction::variable_exponent(p.clone());
            let certs = [
                check_a0(&phi)?,
                check_a1(&phi, *k)?,
                check_a_inc(&phi, p.p_minus())?,
                check_a_dec(&phi, p.p_plus())?,
            ];
            let mut csv = String::from("condition,pass,beta_or_L,witness_x,witness_t\n");
            let mut all_pass = true;
            for c in &certs {
                all_pass &= c.pass;
                let (wx, wt) = match c.counterexample {
                    Some((x, t)) => (format!("{x}"), format!("{t}")),
                    None => (String::new(), String::new()),
                };
                writeln!(
                    csv,
                    "{},{},{},{},{}",
                    c.condition, c.pass, c.witness, wx, wt
                )
                .unwrap();
            }
            Ok(RunOutcome {
                csv,
                summary: format!(
                    "conditions {}",
                    if all_pass { "all pass" } else { "FAILED" }
                ),
                numerical_flag: false,
            })
        }
        Command::Norm {
            function,
            exponent,
            mode,
        } => {
            let u = crate::io::read_grid_function(function)?;
            let p = exponent.resolve(Some(u.domain()), config.resolution)?;
            let phi = PhiFunction::variable_exponent(p);
            let value = match mode {
                NormMode::Modular => modular(&phi, &u).value(),
                NormMode::Norm => luxemburg_norm(&phi, &u)?,
                NormMode::Associate => associate_norm(&phi, &u.cell_midpoint_norm())?,
            };
            Ok(RunOutcome {
                csv: format!("{value}\n"),
                summary: format!("{value}"),
                numerical_flag: false,
            })
        }
        Command::Variation { function, exponent } => {
            let u = crate::io::read_grid_function(function)?;
            let p = exponent.resolve(Some(u.domain()), config.resolution)?;
            let phi = PhiFunction::variable_exponent(p);
            let v = dual_variation(&u, &phi)?;
            let rho = dual_modular(&u, &phi)?;
            let converged = v.converged && rho.converged;
            Ok(RunOutcome {
                csv: format!(
                    "dual_variation,dual_modular,converged\n{},{},{}\n",
                    v.value, rho.value, converged
                ),
                summary: format!("V = {} | rho_V = {}", v.value, rho.value),
                numerical_flag: !converged,
            })
        }
        Command::Energy {
            function,
            jumps,
            exponent,
            integrand,
        } => {
            let u = read_candidate(function, jumps)?;
            let p = exponent.resolve(Some(u.domain()), config.resolution)?;
            let f = parse_integrand(integrand)?;
            let e = relaxed_energy(&u, &f, &p, None)?;
            Ok(RunOutcome {
                csv: format!(
                    "bulk,singular,total\n{},{},{}\n",
                    e.bulk, e.singular, e.total
                ),
                summary: format!("total {}", e.total),
                numerical_flag: false,
            })
        }
        Command::Relax {
            function,
            jumps,
            exponent,
            integrand,
            deltas,
        } => {
            let u = read_candidate(function, jumps)?;
            let p = exponent.resolve(Some(u.domain()), config.resolution)?;
            let f = parse_integrand(integrand)?;
            let deltas = deltas
                .clone()
                .unwrap_or_else(|| default_delta_list(u.domain()));
            let bracket = upper_sequence(&u, &f, &p, &deltas)?;
            let mut csv = String::from(
                "delta,energy_bulkzone,energy_Yzone,omega,corrected,lower,upper,gap\n",
            );
            for s in &bracket.samples {
                writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    s.delta,
                    s.bulk_zone,
                    s.y_zone_linear,
                    s.omega,
                    s.corrected,
                    bracket.lower,
                    bracket.upper,
                    bracket.gap
                )
                .unwrap();
            }
            let warn = if bracket.omega_warning {
                " | WARNING: omega(delta) not decaying"
            } else {
                ""
            };
            Ok(RunOutcome {
                csv,
                summary: format!(
                    "lower {} upper {} gap {}{warn}",
                    bracket.lower, bracket.upper, bracket.gap
                ),
                numerical_flag: false,
            })
        }
        Command::Denoise {
            input,
            exponent,
            lambda,
            eps,
            iters,
            result,
        } => {
            let g = crate::io::read_grid_function(input)?;
            let p = exponent.resolve(Some(g.domain()), config.resolution)?;
            let problem = match eps {
                Some(eps) => DenoiseProblem::with_options(g, p, *lambda, *eps, *iters)?,
                None => {
                    let mut pb = DenoiseProblem::new(g, p, *lambda)?;
                    pb.max_iters = *iters;
                    pb
                }
            };
            let out = denoise(&problem)?;
            crate::io::write_grid_function(result, &out.output)?;
            let mut csv = String::from("iter,energy\n");
            for (i, e) in out.trace.iter().enumerate() {
                writeln!(csv, "{i},{e}").unwrap();
            }
            Ok(RunOutcome {
                csv,
                summary: format!(
                    "final energy {} after {} accepted steps{}",
                    out.trace.last().unwrap(),
                    out.trace.len() - 1,
                    if out.converged {
                        ""
                    } else {
                        " (budget exhausted)"
                    }
                ),
                numerical_flag: !out.converged,
            })
        }
        Command::Corpus { dir } => {
            let manifest = corpus::write_corpus(dir, config.seed)?;
            let mut csv = String::from("case,kind,path\n");
            for (case, kind, path) in &manifest {
                writeln!(csv, "{case},{kind},{path}").unwrap();
            }
            Ok(RunOutcome {
                csv,
                summary: format!(
                    "wrote {} fixture files to {}",
                    manifest.len(),
                    dir.display()
                ),
                numerical_flag: false,
            })
        }
    }
}

/// Run a config end to end: write/print the CSV, print the summary, and map
/// the outcome to the exit code contract (0 ok, 1 invalid input, 2 numerical
/// failure flag).
pub fn run(config: &ExperimentConfig) -> i32 {
    match execute(config) {
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
        Ok(outcome) => {
            if let Some(path) = &config.output {
                if let Err(e) = std::fs::write(path, &outcome.csv) {
                    eprintln!("error: {e}");
                    return 1;
                }
            } else {
                print!("{}", outcome.csv);
            }
            eprintln!("{}", outcome.summary);
            if outcome.numerical_flag {
                2
            } else {
                0
            }
        }
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number {t:?}: {e}")))
        })
        .collect()
}

impl ExperimentConfig {
    /// Build a config from `key = value` text (the `run` subcommand).
    pub fn from_key_values(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| -> Result<&String> {
            map.get(k)
                .ok_or_else(|| Error::Config(format!("missing key `{k}`")))
        };
        let opt_path = |k: &str| map.get(k).map(PathBuf::from);
        let seed = match map.get("seed") {
            Some(s) => s.parse().map_err(|e| Error::Config(format!("seed: {e}")))?,
            None => 42,
        };
        let resolution = match map.get("resolution") {
            Some(s) => s
                .parse()
                .map_err(|e| Error::Config(format!("resolution: {e}")))?,
            None => 256,
        };
        let exponent = || -> Result<ExponentSpec> { Ok(ExponentSpec::parse(get("exponent")?)) };
        let integrand = map
            .get("integrand")
            .cloned()
            .unwrap_or_else(|| "euclidean".to_string());
        let command = match get("command")?.as_str() {
            "check-exponent" => Command::CheckExponent {
                exponent: exponent()?,
                radii: map.get("radii").map(|t| parse_list(t)).transpose()?,
                ball_samples: map
                    .get("ball_samples")
                    .map(|s| {
                        s.parse()
                            .map_err(|e| Error::Config(format!("ball_samples: {e}")))
                    })
                    .transpose()?
                    .unwrap_or(200),
            },
            "check-phi" => Command::CheckPhi {
                exponent: exponent()?,
                k: map
                    .get("k")
                    .map(|s| s.parse().map_err(|e| Error::Config(format!("k: {e}"))))
                    .transpose()?
                    .unwrap_or(1.0),
            },
            "norm" => Command::Norm {
                function: PathBuf::from(get("function")?),
                exponent: exponent()?,
                mode: match get("mode")?.as_str() {
                    "modular" => NormMode::Modular,
                    "norm" => NormMode::Norm,
                    "associate" => NormMode::Associate,
                    other => {
                        return Err(Error::Config(format!("bad norm mode {other:?}")));
                    }
                },
            },
            "variation" => Command::Variation {
                function: PathBuf::from(get("function")?),
                exponent: exponent()?,
            },
            "energy" => Command::Energy {
                function: PathBuf::from(get("function")?),
                jumps: opt_path("jumps"),
                exponent: exponent()?,
                integrand,
            },
            "relax" => Command::Relax {
                function: PathBuf::from(get("function")?),
                jumps: opt_path("jumps"),
                exponent: exponent()?,
                integrand,
                deltas: map.get("deltas").map(|t| parse_list(t)).transpose()?,
            },
            "denoise" => Command::Denoise {
                input: PathBuf::from(get("function")?),
                exponent: exponent()?,
                lambda: get("lambda")?
                    .parse()
                    .map_err(|e| Error::Config(format!("lambda: {e}")))?,
                eps: map
                    .get("eps")
                    .map(|s| s.parse().map_err(|e| Error::Config(format!("eps: {e}"))))
                    .transpose()?,
                iters: map
                    .get("iters")
                    .map(|s| s.parse().map_err(|e| Error::Config(format!("iters: {e}"))))
                    .transpose()?
                    .unwrap_or(2000),
                result: PathBuf::from(get("result")?),
            },
            "corpus" => Command::Corpus {
                dir: PathBuf::from(get("dir")?),
            },
            other => return Err(Error::Config(format!("unknown command {other:?}"))),
        };
        Ok(ExperimentConfig {
            command,
            seed,
            resolution,
            output: opt_path("output"),
        })
    }
}
