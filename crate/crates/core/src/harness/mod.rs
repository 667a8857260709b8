//! Hitting verification, finite hitting sets by interpolation, Jacobian and
//! rank-concentration probes, the natural-proof audit and the experiment
//! runner.

mod algebra;
mod experiment;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError};
use crate::field::{FieldElem, PrimeField};
use crate::generators::{GeneratorError, GeneratorSpec};
use crate::poly::{CoeffVector, PolyError, SparsePoly, DEFAULT_TERM_BUDGET};

pub use algebra::{jacobian, jacobian_rank, rank_concentration_check, rank_mod_p, JacobianRank};
pub use experiment::{
    guarantee, replay_failures, run_experiment, Execution, ExperimentConfig, ExperimentReport,
    FailureRecord, Guarantee, TrialRow, REPORT_JSON_VERSION,
};

pub const DEFAULT_EVALUATIONS: usize = 8;
/// Random seed points tried when looking for a witness of a symbolically
/// nonzero composition.
const WITNESS_ATTEMPTS: usize = 64;
const ZERO_TEST_BUDGET: usize = 1 << 14;
const MAX_HITTING_SET: u128 = 1 << 20;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Generator(GeneratorError),
    #[error(transparent)]
    Circuit(CircuitError),
    #[error("symbolic expansion exceeded {budget} terms; rerun with --mode randomized")]
    SymbolicBudget { budget: usize },
    #[error("field too small: need p > {needed}, have p = {p}")]
    FieldTooSmall { needed: u128, p: u64 },
    #[error("the distinguisher is the zero polynomial")]
    ZeroDistinguisher,
    #[error("{0}")]
    Parameters(String),
}

fn budget_of(e: &PolyError) -> Option<usize> {
    match e {
        PolyError::ExpansionTooLarge { budget } => Some(*budget),
        _ => None,
    }
}

impl From<PolyError> for HarnessError {
    fn from(e: PolyError) -> Self {
        match budget_of(&e) {
            Some(budget) => HarnessError::SymbolicBudget { budget },
            None => HarnessError::Circuit(CircuitError::Poly(e)),
        }
    }
}

impl From<CircuitError> for HarnessError {
    fn from(e: CircuitError) -> Self {
        match e {
            CircuitError::Poly(p) => p.into(),
            e => HarnessError::Circuit(e),
        }
    }
}

impl From<GeneratorError> for HarnessError {
    fn from(e: GeneratorError) -> Self {
        match e {
            GeneratorError::Poly(p) => p.into(),
            GeneratorError::Circuit(c) => c.into(),
            e => HarnessError::Generator(e),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Symbolic,
    Randomized { evaluations: usize },
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Randomized {
            evaluations: DEFAULT_EVALUATIONS,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Symbolic => f.write_str("symbolic"),
            Mode::Randomized { evaluations } if *evaluations == DEFAULT_EVALUATIONS => {
                f.write_str("randomized")
            }
            Mode::Randomized { evaluations } => write!(f, "randomized={evaluations}"),
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once('=') {
            None if s == "symbolic" => Ok(Mode::Symbolic),
            None if s == "randomized" => Ok(Mode::default()),
            Some(("randomized", k)) => match k.parse() {
                Ok(evaluations) if evaluations > 0 => Ok(Mode::Randomized { evaluations }),
                _ => Err(format!("bad evaluation count `{k}`")),
            },
            _ => Err(format!(
                "unknown mode `{s}`; expected symbolic, randomized or randomized=K"
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum HitVerdict {
    /// `D(G(seed)) = value ≠ 0`.
    NonzeroWitness {
        seed: Vec<u64>,
        value: u64,
    },
    /// Exact: `D ∘ G ≢ 0`, but no sampled seed point is a witness (small fields).
    SymbolicallyNonzero {
        terms: usize,
    },
    SymbolicallyZero,
    /// Every evaluation vanished; a nonzero `D ∘ G` survives that with
    /// probability at most `2^failure_bound_log2`.
    ProbablyZero {
        evaluations: usize,
        failure_bound_log2: f64,
    },
    InputZero,
}

impl HitVerdict {
    pub fn is_hit(&self) -> bool {
        matches!(
            self,
            HitVerdict::NonzeroWitness { .. } | HitVerdict::SymbolicallyNonzero { .. }
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            HitVerdict::NonzeroWitness { .. } => "nonzero-witness",
            HitVerdict::SymbolicallyNonzero { .. } => "symbolically-nonzero",
            HitVerdict::SymbolicallyZero => "symbolically-zero",
            HitVerdict::ProbablyZero { .. } => "probably-zero",
            HitVerdict::InputZero => "input-zero",
        }
    }
}

/// The RNG for `stream` under a master seed. Stream numbers, not call order,
/// decide every random choice.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `log2((deg / p)^evaluations)`, capped at 0.
pub fn schwartz_zippel_log2(degree: u64, p: u64, evaluations: usize) -> f64 {
    let per = (degree.max(1) as f64).log2() - (p as f64).log2();
    per.min(0.0) * evaluations as f64
}

/// `Some(true)` if `d` is provably zero, `Some(false)` if provably nonzero,
/// `None` if neither a random evaluation nor a bounded expansion decides.
pub fn exact_zero_test<R: Rng + ?Sized>(d: &Circuit, budget: usize, rng: &mut R) -> Option<bool> {
    let f = d.field();
    let point: Vec<FieldElem> = (0..d.arity()).map(|_| f.random(rng)).collect();
    if d.eval(&point).is_ok_and(|v| !v.is_zero()) {
        return Some(false);
    }
    d.expand_budgeted(budget).ok().map(|p| p.is_zero())
}

/// Checks `D ∘ G ≢ 0` for one spec, reusing the symbolic image across calls.
pub struct HitChecker<'a> {
    spec: &'a GeneratorSpec,
    mode: Mode,
    budget: usize,
    image: Option<CoeffVector<SparsePoly>>,
    seed_degree: u64,
}

impl<'a> HitChecker<'a> {
    pub fn new(spec: &'a GeneratorSpec, mode: Mode, budget: usize) -> Result<Self, HarnessError> {
        let image = match mode {
            Mode::Symbolic => Some(spec.symbolic_image(budget)?),
            Mode::Randomized { .. } => None,
        };
        let seed_degree = spec.seed_degree_bound()?;
        Ok(HitChecker {
            spec,
            mode,
            budget,
            image,
            seed_degree,
        })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        self.spec
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Syntactic bound on `deg(D ∘ G)`.
    pub fn degree_bound(&self, d: &Circuit) -> u64 {
        d.degree_bound().saturating_mul(self.seed_degree)
    }

    pub fn check<R: Rng + ?Sized>(
        &self,
        d: &Circuit,
        rng: &mut R,
    ) -> Result<HitVerdict, HarnessError> {
        self.spec.check_arity(d)?;
        let f = self.spec.field();
        if exact_zero_test(d, ZERO_TEST_BUDGET, rng) == Some(true) {
            return Ok(HitVerdict::InputZero);
        }
        match (&self.image, self.mode) {
            (Some(image), _) => {
                let composed = self.spec.compose_with(d, image, self.budget)?;
                if composed.is_zero() {
                    return Ok(HitVerdict::SymbolicallyZero);
                }
                let n = self.spec.n();
                for _ in 0..WITNESS_ATTEMPTS {
                    let alpha: Vec<FieldElem> =
                        (0..self.spec.seed_arity()).map(|_| f.random(rng)).collect();
                    let mut point = vec![FieldElem::ZERO; n];
                    point.extend_from_slice(&alpha);
                    if !composed.eval(&point)?.is_zero() {
                        if let Some(v) = self.witness(d, &alpha)? {
                            return Ok(v);
                        }
                    }
                }
                Ok(HitVerdict::SymbolicallyNonzero {
                    terms: composed.sparsity(),
                })
            }
            (None, Mode::Randomized { evaluations }) => {
                for _ in 0..evaluations {
                    let alpha: Vec<FieldElem> =
                        (0..self.spec.seed_arity()).map(|_| f.random(rng)).collect();
                    if let Some(v) = self.witness(d, &alpha)? {
                        return Ok(v);
                    }
                }
                Ok(HitVerdict::ProbablyZero {
                    evaluations,
                    failure_bound_log2: schwartz_zippel_log2(
                        self.degree_bound(d),
                        f.modulus(),
                        evaluations,
                    ),
                })
            }
            (None, Mode::Symbolic) => unreachable!("symbolic mode always carries an image"),
        }
    }

    fn witness(
        &self,
        d: &Circuit,
        alpha: &[FieldElem],
    ) -> Result<Option<HitVerdict>, HarnessError> {
        let value = d.eval(self.spec.image(alpha)?.entries())?;
        Ok((!value.is_zero()).then(|| HitVerdict::NonzeroWitness {
            seed: alpha.iter().map(|a| a.value()).collect(),
            value: value.value(),
        }))
    }
}

pub fn hit_check<R: Rng + ?Sized>(
    d: &Circuit,
    spec: &GeneratorSpec,
    mode: Mode,
    rng: &mut R,
) -> Result<HitVerdict, HarnessError> {
    HitChecker::new(spec, mode, DEFAULT_TERM_BUDGET)?.check(d, rng)
}

/// Re-evaluates `D` at `G(seed)`.
pub fn replay_witness(
    d: &Circuit,
    spec: &GeneratorSpec,
    seed: &[u64],
) -> Result<FieldElem, HarnessError> {
    let f = spec.field();
    if let Some(&bad) = seed.iter().find(|&&v| v >= f.modulus()) {
        return Err(HarnessError::Parameters(format!(
            "seed value {bad} is not reduced mod p"
        )));
    }
    let alpha: Vec<FieldElem> = seed.iter().map(|&v| f.elem(v)).collect();
    Ok(d.eval(spec.image(&alpha)?.entries())?)
}

/// A finite hitting set: the spec image of every point of `S^ℓ`,
/// `S = {0, 1, ..., δΔ}`.
#[derive(Clone, Debug)]
pub struct HittingSet {
    pub seed_degree: u64,
    pub delta: u64,
    pub grid: Vec<FieldElem>,
    pub points: Vec<Vec<FieldElem>>,
    pub vectors: Vec<CoeffVector<FieldElem>>,
}

pub fn interpolation_hitting_set(
    spec: &GeneratorSpec,
    delta: u64,
) -> Result<HittingSet, HarnessError> {
    let f = spec.field();
    let seed_degree = spec.seed_degree(DEFAULT_TERM_BUDGET)?;
    let side = seed_degree as u128 * delta as u128 + 1;
    if side > f.modulus() as u128 {
        return Err(HarnessError::FieldTooSmall {
            needed: side - 1,
            p: f.modulus(),
        });
    }
    let ell = spec.seed_arity() as u32;
    let size = side
        .checked_pow(ell)
        .filter(|&s| s <= MAX_HITTING_SET)
        .ok_or_else(|| {
            HarnessError::Parameters(format!(
                "hitting set of size {side}^{ell} exceeds {MAX_HITTING_SET} points"
            ))
        })?;
    let grid: Vec<FieldElem> = (0..side as u64).map(|v| f.elem(v)).collect();
    let mut points = Vec::with_capacity(size as usize);
    let mut vectors = Vec::with_capacity(size as usize);
    let mut digits = vec![0usize; ell as usize];
    for _ in 0..size {
        let alpha: Vec<FieldElem> = digits.iter().map(|&i| grid[i]).collect();
        vectors.push(spec.image(&alpha)?);
        points.push(alpha);
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < grid.len() {
                break;
            }
            *d = 0;
        }
    }
    Ok(HittingSet {
        seed_degree,
        delta,
        grid,
        points,
        vectors,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum AuditOutcome {
    /// `D` vanished on every sample.
    IsDistinguisher { samples: usize },
    /// The first sample on which `D` is nonzero.
    HitWitness { index: usize, value: u64 },
}

/// Whether a nonzero `D` vanishes on all `samples`.
pub fn natural_proof_audit<R: Rng + ?Sized>(
    d: &Circuit,
    samples: &[CoeffVector<FieldElem>],
    rng: &mut R,
) -> Result<AuditOutcome, HarnessError> {
    match exact_zero_test(d, DEFAULT_TERM_BUDGET, rng) {
        Some(false) => {}
        Some(true) => return Err(HarnessError::ZeroDistinguisher),
        None => {
            return Err(HarnessError::SymbolicBudget {
                budget: DEFAULT_TERM_BUDGET,
            })
        }
    }
    for (index, s) in samples.iter().enumerate() {
        if s.len() != d.arity() {
            return Err(HarnessError::Parameters(format!(
                "sample {index} has {} coordinates but D has {} inputs",
                s.len(),
                d.arity()
            )));
        }
        let value = d.eval(s.entries())?;
        if !value.is_zero() {
            return Ok(AuditOutcome::HitWitness {
                index,
                value: value.value(),
            });
        }
    }
    Ok(AuditOutcome::IsDistinguisher {
        samples: samples.len(),
    })
}

/// `count` images at uniform seed points.
pub fn image_samples<R: Rng + ?Sized>(
    spec: &GeneratorSpec,
    count: usize,
    rng: &mut R,
) -> Result<Vec<CoeffVector<FieldElem>>, HarnessError> {
    let f: &PrimeField = spec.field();
    (0..count)
        .map(|_| {
            let alpha: Vec<FieldElem> = (0..spec.seed_arity()).map(|_| f.random(rng)).collect();
            Ok(spec.image(&alpha)?)
        })
        .collect()
}
