//! The `succinct-pit` command line. Exit codes: 0 success, 1 verification
//! failure, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::circuit::{Circuit, ClassDescriptor};
use crate::field::{FieldElem, PrimeField, GOLDILOCKS_PRIME};
use crate::generators::{GeneratorDescriptor, GeneratorSpec};
use crate::harness::{
    image_samples, interpolation_hitting_set, natural_proof_audit, replay_failures, run_experiment,
    stream_rng, Execution, ExperimentConfig, ExperimentReport, Guarantee, Mode,
};
use crate::poly::DEFAULT_TERM_BUDGET;
use crate::witness::{witness_for, WitnessArtifact};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "succinct-pit",
    version,
    about = "Succinct hitting-set generators for PIT",
    arg_required_else_help = true
)]
struct Cli {
    #[command(flatten)]
    field: FieldArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    /// Prime modulus; defaults to 2^64 - 2^32 + 1.
    #[arg(long, global = true)]
    field_prime: Option<u64>,
    /// Factorization of p - 1 as `q^e,...`; computed by trial division when omitted.
    #[arg(long, global = true)]
    field_factors: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Emit a generator spec, optionally with images or a witness at random seeds.
    Gen {
        #[arg(long = "gen")]
        generator: GeneratorDescriptor,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of images at random seed points (needs --seed).
        #[arg(long, default_value_t = 0)]
        images: usize,
        /// Emit the witness artifact at one random seed point (needs --seed).
        #[arg(long)]
        witness: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a hitting experiment, or replay the failures of a report.
    Pit {
        #[arg(long, required_unless_present = "replay")]
        class: Option<ClassDescriptor>,
        #[arg(long = "gen", required_unless_present = "replay")]
        generator: Option<GeneratorDescriptor>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, required_unless_present = "replay")]
        seed: Option<u64>,
        /// `symbolic`, `randomized` or `randomized=K`.
        #[arg(long, default_value = "randomized")]
        mode: Mode,
        /// Run trials on one thread.
        #[arg(long)]
        sequential: bool,
        /// Record wall time (makes the report non-reproducible).
        #[arg(long)]
        timing: bool,
        /// The constant C of the SMESP support bound.
        #[arg(long, default_value_t = 3)]
        smesp_constant: u64,
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        budget: usize,
        /// A report whose failure rows are re-checked.
        #[arg(long, conflicts_with_all = ["class", "generator"])]
        replay: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Expand a circuit JSON file into a polynomial.
    Expand {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        budget: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify a witness artifact, or build one and verify its JSON round trip.
    VerifySuccinct {
        #[arg(long, required_unless_present = "generator")]
        witness: Option<PathBuf>,
        #[arg(long = "gen", conflicts_with = "witness", requires = "seed")]
        generator: Option<GeneratorDescriptor>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_TERM_BUDGET)]
        budget: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check whether a circuit vanishes on sampled generator images.
    Audit {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long = "gen")]
        generator: GeneratorDescriptor,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit the interpolation hitting set of a generator.
    Hitset {
        #[arg(long = "gen")]
        generator: GeneratorDescriptor,
        /// Degree bound of the distinguishers to hit.
        #[arg(long)]
        delta: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(&cli.field, cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Verification(m)) => {
            eprintln!("verification failed: {m}");
            EXIT_FAILED
        }
    }
}

fn field(args: &FieldArgs) -> Result<PrimeField, Failure> {
    match (args.field_prime, &args.field_factors) {
        (None, None) | (Some(GOLDILOCKS_PRIME), None) => Ok(PrimeField::goldilocks()),
        (p, Some(factors)) => {
            let factors = PrimeField::parse_factors(factors)?;
            Ok(PrimeField::new(p.unwrap_or(GOLDILOCKS_PRIME), &factors)?)
        }
        (Some(p), None) => Ok(PrimeField::small(p)?),
    }
}

fn emit(output: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(output: &OutputArgs, v: &Value) -> Result<(), Failure> {
    if output.format == Format::Csv {
        return Err(Failure::Usage(
            "csv output is only available for `pit` reports".into(),
        ));
    }
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit(output, &s)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_circuit(f: &PrimeField, path: &Path) -> Result<Circuit, Failure> {
    Circuit::from_json(f, &read(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn random_alpha(spec: &GeneratorSpec, seed: u64, stream: u64) -> Vec<FieldElem> {
    let mut rng = stream_rng(seed, stream);
    (0..spec.seed_arity())
        .map(|_| spec.field().random(&mut rng))
        .collect()
}

fn values(v: &[FieldElem]) -> Vec<u64> {
    v.iter().map(|x| x.value()).collect()
}

fn dispatch(field_args: &FieldArgs, command: Command) -> Outcome {
    let f = field(field_args)?;
    match command {
        Command::Gen {
            generator,
            seed,
            images,
            witness,
            output,
        } => {
            let spec = GeneratorSpec::build(&generator, &f)?;
            let mut v = spec.to_json_value();
            if images > 0 || witness {
                let seed = seed
                    .ok_or_else(|| Failure::Usage("--images and --witness need --seed".into()))?;
                if images > 0 {
                    let list = (0..images as u64)
                        .map(|i| {
                            let alpha = random_alpha(&spec, seed, i);
                            Ok(json!({ "seed": values(&alpha), "image": spec.image(&alpha)?.values() }))
                        })
                        .collect::<Result<Vec<_>, Failure>>()?;
                    v["images"] = Value::Array(list);
                }
                if witness {
                    let alpha = random_alpha(&spec, seed, images as u64);
                    v["witness"] = witness_for(&spec, &alpha)?.to_json_value();
                }
            }
            emit_json(&output, &v)?;
            Ok(EXIT_OK)
        }
        Command::Pit {
            replay: Some(path),
            output,
            ..
        } => {
            let report = ExperimentReport::from_json(&read(&path)?)?;
            let replayed = replay_failures(&report)?;
            let reproduced = replayed.iter().all(|(_, v)| !v.is_hit());
            let rows: Vec<Value> = replayed
                .iter()
                .map(|(trial, v)| json!({ "trial": trial, "outcome": v.label(), "reproduced": !v.is_hit() }))
                .collect();
            emit_json(
                &output,
                &json!({ "replayed": rows.len(), "reproduced": reproduced, "trials": rows }),
            )?;
            if reproduced {
                Ok(EXIT_OK)
            } else {
                Err(Failure::Verification(
                    "a failure row was hit on replay".into(),
                ))
            }
        }
        Command::Pit {
            class,
            generator,
            trials,
            seed,
            mode,
            sequential,
            timing,
            smesp_constant,
            budget,
            output,
            ..
        } => {
            let (Some(class), Some(generator), Some(seed)) = (class, generator, seed) else {
                return Err(Failure::Usage("pit needs --class, --gen and --seed".into()));
            };
            let mut cfg = ExperimentConfig::new(class, generator, trials, seed);
            cfg.mode = mode;
            cfg.execution = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            cfg.timing = timing;
            cfg.smesp_constant = smesp_constant;
            cfg.budget = budget;
            let report = run_experiment(&cfg, &f)?;
            match output.format {
                Format::Json => emit(&output, &report.to_json())?,
                Format::Csv => emit(&output, &report.to_csv())?,
            }
            if report.guarantee == Guarantee::Guaranteed && report.hits < report.trials {
                return Err(Failure::Verification(format!(
                    "{} of {} trials missed under a guaranteed configuration",
                    report.trials - report.hits,
                    report.trials
                )));
            }
            Ok(EXIT_OK)
        }
        Command::Expand {
            circuit,
            budget,
            output,
        } => {
            let c = load_circuit(&f, &circuit)?;
            let p = c.expand_budgeted(budget)?;
            match output.format {
                Format::Json => emit_json(
                    &output,
                    &json!({ "polynomial": p.to_string(), "terms": p.sparsity(), "degree": p.total_degree() }),
                )?,
                Format::Csv => {
                    return Err(Failure::Usage(
                        "csv output is only available for `pit` reports".into(),
                    ))
                }
            }
            Ok(EXIT_OK)
        }
        Command::VerifySuccinct {
            witness,
            generator,
            seed,
            budget,
            output,
        } => {
            let artifact = match (witness, generator, seed) {
                (Some(path), _, _) => WitnessArtifact::from_json(&f, &read(&path)?)
                    .map_err(|e| Failure::Usage(e.to_string()))?,
                (None, Some(g), Some(seed)) => {
                    let spec = GeneratorSpec::build(&g, &f)?;
                    let built = witness_for(&spec, &random_alpha(&spec, seed, 0))?;
                    let back = WitnessArtifact::from_json(&f, &built.to_json_value().to_string())?;
                    if back != built {
                        return Err(Failure::Verification(
                            "witness JSON does not round-trip".into(),
                        ));
                    }
                    back
                }
                _ => {
                    return Err(Failure::Usage(
                        "give --witness, or --gen with --seed".into(),
                    ))
                }
            };
            let ok = artifact.verify(&f, budget)?;
            emit_json(
                &output,
                &json!({
                    "generator": artifact.generator.to_string(),
                    "kind": artifact.kind(),
                    "declared_size": artifact.declared_size,
                    "verified": ok,
                }),
            )?;
            if ok {
                Ok(EXIT_OK)
            } else {
                Err(Failure::Verification(
                    "witness expansion differs from the generator image".into(),
                ))
            }
        }
        Command::Audit {
            circuit,
            generator,
            samples,
            seed,
            output,
        } => {
            let d = load_circuit(&f, &circuit)?;
            let spec = GeneratorSpec::build(&generator, &f)?;
            let images = image_samples(&spec, samples, &mut stream_rng(seed, 0))?;
            let outcome = natural_proof_audit(&d, &images, &mut stream_rng(seed, 1))?;
            emit_json(
                &output,
                &json!({ "generator": generator.to_string(), "audit": outcome }),
            )?;
            Ok(EXIT_OK)
        }
        Command::Hitset {
            generator,
            delta,
            output,
        } => {
            let spec = GeneratorSpec::build(&generator, &f)?;
            let h = interpolation_hitting_set(&spec, delta)?;
            emit_json(
                &output,
                &json!({
                    "generator": generator.to_string(),
                    "seed_degree": h.seed_degree,
                    "delta": h.delta,
                    "seed_arity": spec.seed_arity(),
                    "grid": values(&h.grid),
                    "size": h.vectors.len(),
                    "points": h.points.iter().map(|p| values(p)).collect::<Vec<_>>(),
                    "vectors": h.vectors.iter().map(|v| v.values()).collect::<Vec<_>>(),
                }),
            )?;
            Ok(EXIT_OK)
        }
    }
}
