use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{stream_rng, HarnessError, HitChecker, HitVerdict, Mode};
use crate::circuit::{sample_class, Circuit, ClassDescriptor};
use crate::field::PrimeField;
use crate::generators::{monomial_compatible_order, GeneratorDescriptor, GeneratorSpec};
use crate::params::ceil_log2;
use crate::poly::DEFAULT_TERM_BUDGET;

pub const REPORT_JSON_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon over trials; sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub class: ClassDescriptor,
    pub generator: GeneratorDescriptor,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub execution: Execution,
    /// The constant `C` of the SMESP support bound `C ⌈log s⌉`.
    pub smesp_constant: u64,
    pub budget: usize,
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(
        class: ClassDescriptor,
        generator: GeneratorDescriptor,
        trials: usize,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            class,
            generator,
            trials,
            seed,
            mode: Mode::default(),
            execution: Execution::default(),
            smesp_constant: 3,
            budget: DEFAULT_TERM_BUDGET,
            timing: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Guarantee {
    Guaranteed,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub outcome: String,
    pub hit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_point: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<u64>,
    pub degree_bound: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_bound_log2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub outcome: String,
    pub circuit: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub prime: u64,
    pub generator: u64,
    pub factors: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: u64,
    pub class: String,
    pub generator: String,
    pub field: FieldInfo,
    pub mode: String,
    pub seed: u64,
    pub trials: usize,
    pub hits: usize,
    pub guarantee: Guarantee,
    pub notes: Vec<String>,
    pub rows: Vec<TrialRow>,
    pub failures: Vec<FailureRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    trial: usize,
    outcome: &'a str,
    hit: bool,
    value: String,
    seed_point: String,
    degree_bound: u64,
    failure_bound_log2: String,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<ExperimentReport, HarnessError> {
        let report: ExperimentReport = serde_json::from_str(text)
            .map_err(|e| HarnessError::Parameters(format!("report JSON: {e}")))?;
        if report.version != REPORT_JSON_VERSION {
            return Err(HarnessError::Parameters(format!(
                "unsupported report version {}",
                report.version
            )));
        }
        Ok(report)
    }

    /// Header plus one row per trial.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record([
                "trial",
                "outcome",
                "hit",
                "value",
                "seed_point",
                "degree_bound",
                "failure_bound_log2",
            ])
            .expect("in-memory write");
        }
        for r in &self.rows {
            w.serialize(CsvRow {
                trial: r.trial,
                outcome: &r.outcome,
                hit: r.hit,
                value: r.value.map(|v| v.to_string()).unwrap_or_default(),
                seed_point: r
                    .seed_point
                    .as_ref()
                    .map(|s| s.iter().map(u64::to_string).collect::<Vec<_>>().join(";"))
                    .unwrap_or_default(),
                degree_bound: r.degree_bound,
                failure_bound_log2: r
                    .failure_bound_log2
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            })
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn field(&self) -> Result<PrimeField, HarnessError> {
        let factors =
            PrimeField::parse_factors(&self.field.factors).map_err(HarnessError::Parameters)?;
        PrimeField::with_generator(self.field.prime, &factors, self.field.generator)
            .map_err(|e| HarnessError::Parameters(e.to_string()))
    }
}

/// The label a run earns and the parameter checks behind it.
pub fn guarantee(
    class: &ClassDescriptor,
    spec: &GeneratorSpec,
    smesp_constant: u64,
) -> (Guarantee, Vec<String>) {
    let p = spec.field().modulus() as u128;
    let big_n = spec.coordinates() as u128;
    let mut notes = Vec::new();
    let mut ok = |cond: bool, note: String| {
        notes.push(format!("{note}: {}", if cond { "holds" } else { "fails" }));
        cond
    };
    let guaranteed = match (class, spec.descriptor()) {
        (_, _) if spec.heuristic_parameters() => {
            notes.push("heuristic parameters: R is overridden".into());
            false
        }
        (ClassDescriptor::SigmaPi { s, deg }, GeneratorDescriptor::Sssv { k, .. }) => {
            let need = ceil_log2(*s as u64);
            let a = ok(
                *k as u64 >= need,
                format!("k = {k} >= ceil(log2 s) = {need}"),
            );
            a & ok(p > *deg as u128, format!("p > deg = {deg}"))
        }
        (ClassDescriptor::Smesp { s, .. }, GeneratorDescriptor::Sssv { k, .. }) => {
            let need = smesp_constant * ceil_log2(*s as u64);
            ok(
                *k as u64 >= need,
                format!("k = {k} >= C ceil(log2 s) = {need} with C = {smesp_constant}"),
            );
            notes.push("the SMESP support constant C is not determined; label is heuristic".into());
            false
        }
        (ClassDescriptor::SigmaKPiSigma { k, .. }, GeneratorDescriptor::Rc { r, .. }) => {
            ok(*r > k * k, format!("r = {r} >= k^2 + 1 = {}", k * k + 1));
            notes.push(
                "k^2 + 1 is the characteristic-zero rank bound; label is heuristic over F_p".into(),
            );
            false
        }
        (ClassDescriptor::CommRoAbpFamily { w, d }, GeneratorDescriptor::Ssv { k, .. }) => {
            let need = 1 + 4 * ceil_log2(*w as u64);
            let a = ok(
                *k as u64 >= need,
                format!("k = {k} >= 1 + 4 ceil(log2 w) = {need}"),
            );
            a & ok(
                p > big_n * *d as u128,
                format!("p > N d = {}", big_n * *d as u128),
            )
        }
        (
            ClassDescriptor::RoAbp { w, d, order },
            GeneratorDescriptor::Fs {
                w: w2,
                d: d2,
                order: sigma,
                n,
            },
        ) => {
            let sigma = sigma.clone().unwrap_or_else(|| (1..=*n).collect());
            let compatible = monomial_compatible_order(&sigma);
            let class_order = order
                .clone()
                .unwrap_or_else(|| (1..=spec.coordinates()).collect());
            let a = ok(w2 >= w, format!("w' = {w2} >= w = {w}"));
            let b = ok(d2 >= d, format!("d' = {d2} >= d = {d}"));
            a & b
                & ok(
                    class_order == compatible,
                    "roABP order is monomial-compatible with the FS order".into(),
                )
        }
        (
            ClassDescriptor::SparseCompose { m, s, .. },
            GeneratorDescriptor::Bms { r, s: s2, .. },
        ) => {
            let a = ok(r >= m, format!("r = {r} >= m = {m}"));
            let b = ok(*s2 >= *s as u64, format!("s' = {s2} >= s = {s}"));
            let bound = 2u128.checked_pow(*r as u32);
            a & b & ok(bound.is_some_and(|b| p >= b), format!("p >= 2^r = 2^{r}"))
        }
        (ClassDescriptor::LowTrdeg { k, d, .. }, GeneratorDescriptor::Trdeg { k: k2, .. }) => {
            let a = ok(k2 >= k, format!("k' = {k2} >= k = {k}"));
            let bound = (*d as u128).checked_pow(*k as u32);
            a & ok(bound.is_some_and(|b| p >= b), format!("p >= d^k = {d}^{k}"))
        }
        (c, g) => {
            notes.push(format!(
                "no hitting theorem pairs `{}` with `{}`",
                c,
                g.kind()
            ));
            false
        }
    };
    (
        if guaranteed {
            Guarantee::Guaranteed
        } else {
            Guarantee::Heuristic
        },
        notes,
    )
}

struct TrialResult {
    row: TrialRow,
    failure: Option<FailureRecord>,
}

fn run_trial(
    cfg: &ExperimentConfig,
    checker: &HitChecker<'_>,
    trial: usize,
) -> Result<TrialResult, HarnessError> {
    let spec = checker.spec();
    let mut rng = stream_rng(cfg.seed, 2 * trial as u64);
    let member = sample_class(&cfg.class, spec.field(), spec.coordinates(), &mut rng)?;
    let circuit = member.to_circuit()?;
    let verdict = checker.check(&circuit, &mut stream_rng(cfg.seed, 2 * trial as u64 + 1))?;
    let degree_bound = checker.degree_bound(&circuit);
    let failure_bound_log2 = match (&verdict, checker.mode()) {
        (
            HitVerdict::ProbablyZero {
                failure_bound_log2, ..
            },
            _,
        ) => Some(*failure_bound_log2),
        (_, Mode::Randomized { evaluations }) => Some(super::schwartz_zippel_log2(
            degree_bound,
            spec.field().modulus(),
            evaluations,
        )),
        _ => None,
    };
    let (seed_point, value) = match &verdict {
        HitVerdict::NonzeroWitness { seed, value } => (Some(seed.clone()), Some(*value)),
        _ => (None, None),
    };
    let hit = verdict.is_hit();
    let row = TrialRow {
        trial,
        outcome: verdict.label().to_string(),
        hit,
        seed_point,
        value,
        degree_bound,
        failure_bound_log2,
    };
    let failure = (!hit).then(|| FailureRecord {
        trial,
        outcome: verdict.label().to_string(),
        circuit: circuit.to_json_value(),
    });
    Ok(TrialResult { row, failure })
}

fn run_trials(
    cfg: &ExperimentConfig,
    checker: &HitChecker<'_>,
) -> Result<Vec<TrialResult>, HarnessError> {
    #[cfg(feature = "parallel")]
    if cfg.execution == Execution::Parallel {
        use rayon::prelude::*;
        return (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, checker, t))
            .collect();
    }
    (0..cfg.trials)
        .map(|t| run_trial(cfg, checker, t))
        .collect()
}

/// Samples `trials` class members and hit-checks each against the generator.
/// Trial `t` samples from stream `2t` and checks with stream `2t + 1`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    field: &PrimeField,
) -> Result<ExperimentReport, HarnessError> {
    let start = Instant::now();
    let spec = GeneratorSpec::build(&cfg.generator, field)?;
    let (label, notes) = guarantee(&cfg.class, &spec, cfg.smesp_constant);
    let checker = HitChecker::new(&spec, cfg.mode, cfg.budget)?;
    let results = run_trials(cfg, &checker)?;
    let hits = results.iter().filter(|r| r.row.hit).count();
    let (rows, failures): (Vec<_>, Vec<_>) =
        results.into_iter().map(|r| (r.row, r.failure)).unzip();
    Ok(ExperimentReport {
        version: REPORT_JSON_VERSION,
        class: cfg.class.to_string(),
        generator: cfg.generator.to_string(),
        field: FieldInfo {
            prime: field.modulus(),
            generator: field.generator().value(),
            factors: field.factors_string(),
        },
        mode: cfg.mode.to_string(),
        seed: cfg.seed,
        trials: cfg.trials,
        hits,
        guarantee: label,
        notes,
        rows,
        failures: failures.into_iter().flatten().collect(),
        wall_time_ms: cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Re-runs the hit check of every failure row with its original stream.
pub fn replay_failures(
    report: &ExperimentReport,
) -> Result<Vec<(usize, HitVerdict)>, HarnessError> {
    let field = report.field()?;
    let generator: GeneratorDescriptor =
        report.generator.parse().map_err(HarnessError::Parameters)?;
    let mode: Mode = report.mode.parse().map_err(HarnessError::Parameters)?;
    let spec = GeneratorSpec::build(&generator, &field)?;
    let checker = HitChecker::new(&spec, mode, DEFAULT_TERM_BUDGET)?;
    report
        .failures
        .iter()
        .map(|f| {
            let circuit = Circuit::from_json_value(&field, &f.circuit)?;
            let verdict = checker.check(
                &circuit,
                &mut stream_rng(report.seed, 2 * f.trial as u64 + 1),
            )?;
            Ok((f.trial, verdict))
        })
        .collect()
}
