//! Restricted circuit classes: descriptors, samplers and structural checks.
//!
//! Sampling scheme. Coefficients that carry the leading structure (top-level
//! weights, sparse-term coefficients, leading univariate coefficients) are
//! uniform over `F_p \ {0}`; every other coefficient is uniform over `F_p`.
//! Random monomials pick their degree uniformly in the allowed range and then
//! that many variables uniformly with replacement. A sample that evaluates to
//! zero at four random points is discarded and redrawn.
//!
//! | class | shape |
//! |---|---|
//! | `sparse:s,deg` | `s` random monomials of degree `0..=deg` |
//! | `spsk:k,d` | `k` products of `d` dense affine forms |
//! | `smesp:t,s` | `s` terms `X^a · F^e`, `deg X^a ≤ 2`, `F` with ≤ 3 terms of degree `1..=t`, `e ∈ 1..=3` |
//! | `occur:D,k,s` | `D-2` layers of `+` / power-product gates of fan-in 2 or 3 (labels 1 or 2) over leaves of ≤ 2 terms; resampled until size ≤ s |
//! | `comm-roabp:w,d` | `Σ_{m≤w} c_m Π_i u_{m,i}(X_i)`, `deg u = d` |
//! | `roabp:w,d,order` | `1×w`, `w×w`, …, `w×1` matrices of degree-`≤d` univariates |
//! | `sparse-compose:m,s,deg` | `C(F_1..F_m)`, `F_j` with `s` terms of degree 1 or 2, `C` with ≤ 3 terms of degree `1..=deg` plus a constant |
//! | `trdeg-products:k,d,m` | `C(T_1..T_m)`, `T_j` a product of `d` of `k` shared affine forms, `C` as above with degree ≤ 2 |

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Circuit, CircuitBuilder, CircuitError, CommRoAbp, Gate, NodeId, RoAbp, RoAbpLayer};
use crate::field::{FieldElem, PrimeField};
use crate::params::{join_list, Params};
use crate::poly::{Monomial, SparsePoly, UniPoly, VarArena, VarId};

const MAX_ATTEMPTS: usize = 64;
const ZERO_TEST_POINTS: usize = 4;

/// The arena `c1, ..., cN` of coefficient variables.
pub fn coefficient_arena(n: usize) -> Arc<VarArena> {
    VarArena::numbered("c", n)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassDescriptor {
    SigmaPi {
        s: usize,
        deg: u32,
    },
    SigmaKPiSigma {
        k: usize,
        d: usize,
    },
    Smesp {
        t: u32,
        s: usize,
    },
    OccurK {
        depth: usize,
        k: usize,
        s: usize,
    },
    CommRoAbpFamily {
        w: usize,
        d: usize,
    },
    /// `order` lists 1-based variable indices; `None` is `X_1, ..., X_N`.
    RoAbp {
        w: usize,
        d: usize,
        order: Option<Vec<usize>>,
    },
    SparseCompose {
        m: usize,
        s: usize,
        deg: u32,
    },
    LowTrdeg {
        k: usize,
        d: usize,
        m: usize,
    },
}

impl ClassDescriptor {
    pub const KINDS: &'static [&'static str] = &[
        "sparse",
        "spsk",
        "smesp",
        "occur",
        "comm-roabp",
        "roabp",
        "sparse-compose",
        "trdeg-products",
    ];

    fn check(&self) -> Result<(), String> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(format!("`{name}` must be >= 1"))
            } else {
                Ok(())
            }
        };
        match self {
            ClassDescriptor::SigmaPi { s, .. } => positive("s", *s),
            ClassDescriptor::SigmaKPiSigma { k, d } => positive("k", *k).and(positive("d", *d)),
            ClassDescriptor::Smesp { t, s } => positive("t", *t as usize).and(positive("s", *s)),
            ClassDescriptor::OccurK { depth, k, s } => {
                positive("k", *k)?;
                positive("s", *s)?;
                if *depth < 3 {
                    return Err("`D` must be >= 3".into());
                }
                Ok(())
            }
            ClassDescriptor::CommRoAbpFamily { w, d } | ClassDescriptor::RoAbp { w, d, .. } => {
                positive("w", *w).and(positive("d", *d))
            }
            ClassDescriptor::SparseCompose { m, s, deg } => positive("m", *m)
                .and(positive("s", *s))
                .and(positive("deg", *deg as usize)),
            ClassDescriptor::LowTrdeg { k, d, m } => positive("k", *k)
                .and(positive("d", *d))
                .and(positive("m", *m)),
        }
    }
}

impl fmt::Display for ClassDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassDescriptor::SigmaPi { s, deg } => write!(f, "sparse:s={s},deg={deg}"),
            ClassDescriptor::SigmaKPiSigma { k, d } => write!(f, "spsk:k={k},d={d}"),
            ClassDescriptor::Smesp { t, s } => write!(f, "smesp:t={t},s={s}"),
            ClassDescriptor::OccurK { depth, k, s } => write!(f, "occur:D={depth},k={k},s={s}"),
            ClassDescriptor::CommRoAbpFamily { w, d } => write!(f, "comm-roabp:w={w},d={d}"),
            ClassDescriptor::RoAbp { w, d, order } => {
                write!(f, "roabp:w={w},d={d}")?;
                if let Some(order) = order {
                    write!(f, ",order={}", join_list(order))?;
                }
                Ok(())
            }
            ClassDescriptor::SparseCompose { m, s, deg } => {
                write!(f, "sparse-compose:m={m},s={s},deg={deg}")
            }
            ClassDescriptor::LowTrdeg { k, d, m } => write!(f, "trdeg-products:k={k},d={d},m={m}"),
        }
    }
}

impl FromStr for ClassDescriptor {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let mut p = Params::parse(text)?;
        let desc = match p.name.as_str() {
            "sparse" => ClassDescriptor::SigmaPi {
                s: p.required("s")?,
                deg: p.optional("deg")?.unwrap_or(3),
            },
            "spsk" => ClassDescriptor::SigmaKPiSigma {
                k: p.required("k")?,
                d: p.required("d")?,
            },
            "smesp" => ClassDescriptor::Smesp {
                t: p.required("t")?,
                s: p.required("s")?,
            },
            "occur" => ClassDescriptor::OccurK {
                depth: p.required("D")?,
                k: p.required("k")?,
                s: p.required("s")?,
            },
            "comm-roabp" => ClassDescriptor::CommRoAbpFamily {
                w: p.required("w")?,
                d: p.required("d")?,
            },
            "roabp" => ClassDescriptor::RoAbp {
                w: p.required("w")?,
                d: p.required("d")?,
                order: p.list("order")?,
            },
            "sparse-compose" => ClassDescriptor::SparseCompose {
                m: p.required("m")?,
                s: p.required("s")?,
                deg: p.optional("deg")?.unwrap_or(3),
            },
            "trdeg-products" => ClassDescriptor::LowTrdeg {
                k: p.required("k")?,
                d: p.required("d")?,
                m: p.required("m")?,
            },
            other => {
                return Err(format!(
                    "unknown class `{other}`; valid kinds: {}",
                    ClassDescriptor::KINDS.join(", ")
                ))
            }
        };
        p.finish()?;
        desc.check()?;
        Ok(desc)
    }
}

impl Serialize for ClassDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClassDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A sampled class member in its native representation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassMember {
    Circuit(Circuit),
    RoAbp(RoAbp),
    CommRoAbp(CommRoAbp),
}

impl ClassMember {
    pub fn arena(&self) -> &Arc<VarArena> {
        match self {
            ClassMember::Circuit(c) => c.arena(),
            ClassMember::RoAbp(a) => a.arena(),
            ClassMember::CommRoAbp(a) => a.arena(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arena().len()
    }

    pub fn eval(&self, point: &[FieldElem]) -> Result<FieldElem, CircuitError> {
        match self {
            ClassMember::Circuit(c) => c.eval(point),
            ClassMember::RoAbp(a) => a.eval(point),
            ClassMember::CommRoAbp(a) => a.eval(point),
        }
    }

    pub fn expand(&self, budget: usize) -> Result<SparsePoly, CircuitError> {
        match self {
            ClassMember::Circuit(c) => c.expand_budgeted(budget),
            ClassMember::RoAbp(a) => a.expand(budget),
            ClassMember::CommRoAbp(a) => a.expand(budget),
        }
    }

    pub fn to_circuit(&self) -> Result<Circuit, CircuitError> {
        match self {
            ClassMember::Circuit(c) => Ok(c.clone()),
            ClassMember::RoAbp(a) => a.to_circuit(),
            ClassMember::CommRoAbp(a) => a.to_circuit(),
        }
    }
}

/// Draws a nonzero member of `desc` over `N = arity` variables `c1..cN`.
pub fn sample_class<R: Rng + ?Sized>(
    desc: &ClassDescriptor,
    field: &PrimeField,
    arity: usize,
    rng: &mut R,
) -> Result<ClassMember, CircuitError> {
    desc.check().map_err(CircuitError::Parameters)?;
    if arity == 0 {
        return Err(CircuitError::Parameters("arity must be >= 1".into()));
    }
    let arena = coefficient_arena(arity);
    for _ in 0..MAX_ATTEMPTS {
        let Some(member) = draw(desc, field, &arena, rng)? else {
            continue;
        };
        let nonzero = (0..ZERO_TEST_POINTS).any(|_| {
            let point: Vec<FieldElem> = (0..arity).map(|_| field.random(rng)).collect();
            member.eval(&point).map(|v| !v.is_zero()).unwrap_or(false)
        });
        if nonzero {
            return Ok(member);
        }
    }
    Err(CircuitError::Degenerate {
        class: desc.to_string(),
        attempts: MAX_ATTEMPTS,
    })
}

/// One draw; `None` when a rejection rule (such as the occur-k size bound)
/// fires.
fn draw<R: Rng + ?Sized>(
    desc: &ClassDescriptor,
    field: &PrimeField,
    arena: &Arc<VarArena>,
    rng: &mut R,
) -> Result<Option<ClassMember>, CircuitError> {
    let n = arena.len();
    let mut b = CircuitBuilder::new(field, arena);
    let out = match desc {
        ClassDescriptor::SigmaPi { s, deg } => {
            let p = random_sparse(field, arena, rng, *s, 0..=*deg, n);
            b.sparse(&p)
        }
        ClassDescriptor::SigmaKPiSigma { k, d } => {
            let products: Vec<NodeId> = (0..*k)
                .map(|_| {
                    let forms = (0..*d).map(|_| random_affine(&mut b, rng, n)).collect();
                    b.mul(forms)
                })
                .collect();
            let weights = (0..*k).map(|_| field.random_nonzero(rng)).collect();
            b.linear(products, weights, FieldElem::ZERO)
        }
        ClassDescriptor::Smesp { t, s } => {
            let terms: Vec<NodeId> = (0..*s)
                .map(|_| {
                    let terms = rng.gen_range(1..=3);
                    let mut inner = random_sparse(field, arena, rng, terms, 1..=*t, n);
                    inner.add_term(Monomial::one(), field.random(rng));
                    let inner_node = b.sparse(&inner);
                    let power = b.pow(vec![inner_node], vec![rng.gen_range(1..=3)]);
                    match b.monomial(&random_monomial(rng, 0..=2, n)) {
                        Some(m) => b.mul(vec![m, power]),
                        None => power,
                    }
                })
                .collect();
            let weights = (0..*s).map(|_| field.random_nonzero(rng)).collect();
            b.linear(terms, weights, FieldElem::ZERO)
        }
        ClassDescriptor::OccurK { depth, k, s } => {
            let mut uses = vec![0usize; n];
            let out = occur_subtree(&mut b, rng, depth - 2, *k, &mut uses);
            let circuit = b.finish(out)?;
            let within = occur_measure(&circuit)
                .map(|m| m.size <= *s)
                .unwrap_or(false);
            return Ok(within.then_some(ClassMember::Circuit(circuit)));
        }
        ClassDescriptor::CommRoAbpFamily { w, d } => {
            let coeffs = (0..*w).map(|_| field.random_nonzero(rng)).collect();
            let factors = (0..*w)
                .map(|_| {
                    (0..n)
                        .map(|_| random_univariate(field, rng, *d, true))
                        .collect()
                })
                .collect();
            return Ok(Some(ClassMember::CommRoAbp(CommRoAbp::new(
                field, arena, coeffs, factors,
            )?)));
        }
        ClassDescriptor::RoAbp { w, d, order } => {
            let order = resolve_order(order.as_deref(), n)?;
            let layers = order
                .iter()
                .enumerate()
                .map(|(pos, &v)| {
                    let rows = if pos == 0 { 1 } else { *w };
                    let cols = if pos + 1 == n { 1 } else { *w };
                    let entries = (0..rows)
                        .map(|_| {
                            (0..cols)
                                .map(|_| random_univariate(field, rng, *d, false))
                                .collect()
                        })
                        .collect();
                    RoAbpLayer {
                        var: Some(v),
                        entries,
                    }
                })
                .collect();
            return Ok(Some(ClassMember::RoAbp(RoAbp::new(field, arena, layers)?)));
        }
        ClassDescriptor::SparseCompose { m, s, deg } => {
            let inner: Vec<NodeId> = (0..*m)
                .map(|_| {
                    let p = random_sparse(field, arena, rng, *s, 1..=2, n);
                    b.sparse(&p)
                })
                .collect();
            outer_polynomial(&mut b, rng, &inner, *deg)
        }
        ClassDescriptor::LowTrdeg { k, d, m } => {
            let forms: Vec<NodeId> = (0..*k).map(|_| random_affine(&mut b, rng, n)).collect();
            let products: Vec<NodeId> = (0..*m)
                .map(|_| {
                    let picks = (0..*d).map(|_| forms[rng.gen_range(0..*k)]).collect();
                    b.mul(picks)
                })
                .collect();
            outer_polynomial(&mut b, rng, &products, 2)
        }
    };
    Ok(Some(ClassMember::Circuit(b.finish(out)?)))
}

fn resolve_order(order: Option<&[usize]>, n: usize) -> Result<Vec<VarId>, CircuitError> {
    let Some(order) = order else {
        return Ok((0..n as u32).map(VarId).collect());
    };
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=n).collect::<Vec<_>>() {
        return Err(CircuitError::Parameters(format!(
            "order {} is not a permutation of 1..={n}",
            join_list(order)
        )));
    }
    Ok(order.iter().map(|&i| VarId(i as u32 - 1)).collect())
}

fn random_monomial<R: Rng + ?Sized>(
    rng: &mut R,
    degrees: std::ops::RangeInclusive<u32>,
    n: usize,
) -> Monomial {
    let degree = rng.gen_range(degrees);
    Monomial::from_pairs((0..degree).map(|_| (VarId(rng.gen_range(0..n) as u32), 1)))
}

fn random_sparse<R: Rng + ?Sized>(
    field: &PrimeField,
    arena: &Arc<VarArena>,
    rng: &mut R,
    terms: usize,
    degrees: std::ops::RangeInclusive<u32>,
    n: usize,
) -> SparsePoly {
    let mut p = SparsePoly::zero(field, arena);
    for _ in 0..terms {
        let m = random_monomial(rng, degrees.clone(), n);
        p.add_term(m, field.random_nonzero(rng));
    }
    p
}

/// A dense affine form: one add gate over every input.
fn random_affine<R: Rng + ?Sized>(b: &mut CircuitBuilder, rng: &mut R, n: usize) -> NodeId {
    let field = b.field().clone();
    let inputs = (0..n as u32).map(|v| b.input(VarId(v))).collect();
    let weights = (0..n).map(|_| field.random(rng)).collect();
    b.linear(inputs, weights, field.random(rng))
}

fn random_univariate<R: Rng + ?Sized>(
    field: &PrimeField,
    rng: &mut R,
    d: usize,
    exact: bool,
) -> UniPoly {
    let mut coeffs: Vec<FieldElem> = (0..=d).map(|_| field.random(rng)).collect();
    if exact {
        coeffs[d] = field.random_nonzero(rng);
    }
    UniPoly::new(coeffs)
}

/// `C(g_1, ..., g_m)` with `C` of at most three terms of degree `1..=deg`
/// plus a random constant.
fn outer_polynomial<R: Rng + ?Sized>(
    b: &mut CircuitBuilder,
    rng: &mut R,
    inner: &[NodeId],
    deg: u32,
) -> NodeId {
    let field = b.field().clone();
    let mut c = BTreeMap::<Vec<(usize, u32)>, FieldElem>::new();
    for _ in 0..rng.gen_range(1..=3) {
        let degree = rng.gen_range(1..=deg);
        let mut exps = BTreeMap::<usize, u32>::new();
        for _ in 0..degree {
            *exps.entry(rng.gen_range(0..inner.len())).or_default() += 1;
        }
        let key: Vec<(usize, u32)> = exps.into_iter().collect();
        let coeff = field.random_nonzero(rng);
        let slot = c.entry(key).or_insert(FieldElem::ZERO);
        *slot = field.add(*slot, coeff);
    }
    let mut children = Vec::new();
    let mut weights = Vec::new();
    for (key, coeff) in c {
        if coeff.is_zero() {
            continue;
        }
        let (nodes, exps) = key.iter().map(|&(j, e)| (inner[j], e)).unzip();
        children.push(b.pow(nodes, exps));
        weights.push(coeff);
    }
    b.linear(children, weights, field.random(rng))
}

fn occur_subtree<R: Rng + ?Sized>(
    b: &mut CircuitBuilder,
    rng: &mut R,
    layers: usize,
    k: usize,
    uses: &mut [usize],
) -> NodeId {
    let field = b.field().clone();
    if layers == 0 {
        let available: Vec<usize> = (0..uses.len()).filter(|&v| uses[v] < k).collect();
        let mut leaf_vars = BTreeSet::new();
        let mut p = SparsePoly::zero(&field, &b.arena().clone());
        for _ in 0..rng.gen_range(1..=2) {
            if available.is_empty() {
                break;
            }
            let size = rng.gen_range(1..=2.min(available.len()));
            let vars: BTreeSet<usize> = (0..size)
                .map(|_| available[rng.gen_range(0..available.len())])
                .collect();
            leaf_vars.extend(vars.iter().copied());
            let m = Monomial::from_pairs(vars.iter().map(|&v| (VarId(v as u32), 1)));
            p.add_term(m, field.random_nonzero(rng));
        }
        p.add_term(Monomial::one(), field.random(rng));
        for v in leaf_vars {
            uses[v] += 1;
        }
        return b.sparse(&p);
    }
    let fan_in = rng.gen_range(2..=3);
    let children: Vec<NodeId> = (0..fan_in)
        .map(|_| occur_subtree(b, rng, layers - 1, k, uses))
        .collect();
    if rng.gen_bool(0.5) {
        let weights = (0..fan_in).map(|_| field.random_nonzero(rng)).collect();
        b.linear(children, weights, FieldElem::ZERO)
    } else {
        let exps = (0..fan_in).map(|_| rng.gen_range(1..=2)).collect();
        b.pow(children, exps)
    }
}

/// Findings of a structural class check; `ok` when there are none.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub findings: Vec<String>,
}

impl ValidationReport {
    fn from_findings(findings: Vec<String>) -> Self {
        ValidationReport {
            ok: findings.is_empty(),
            findings,
        }
    }
}

/// Measures of a circuit read as an occur-k formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccurMeasure {
    pub size: usize,
    /// Layers of `+` and power-product gates, plus 2.
    pub depth: usize,
    pub leaves: usize,
    /// Number of leaves each variable occurs in.
    pub occurrences: BTreeMap<String, usize>,
}

fn is_monomial_gate(c: &Circuit, id: NodeId) -> bool {
    let is_input = |i: NodeId| matches!(c.nodes()[i], Gate::Input(_));
    match &c.nodes()[id] {
        Gate::Input(_) => true,
        Gate::Mul { children } | Gate::Pow { children, .. } => {
            children.iter().all(|&i| is_input(i))
        }
        _ => false,
    }
}

/// Term count of a ΣΠ subcircuit rooted at `id`.
fn sparse_terms(c: &Circuit, id: NodeId) -> Option<usize> {
    match &c.nodes()[id] {
        Gate::Const(v) => Some(usize::from(!v.is_zero())),
        Gate::Add {
            children, constant, ..
        } => children
            .iter()
            .all(|&i| is_monomial_gate(c, i) || matches!(c.nodes()[i], Gate::Const(_)))
            .then_some(children.len() + usize::from(!constant.is_zero())),
        _ if is_monomial_gate(c, id) => Some(1),
        _ => None,
    }
}

fn is_affine(c: &Circuit, id: NodeId) -> bool {
    match &c.nodes()[id] {
        Gate::Input(_) | Gate::Const(_) => true,
        Gate::Add { children, .. } => children
            .iter()
            .all(|&i| matches!(c.nodes()[i], Gate::Input(_))),
        _ => false,
    }
}

fn subtree_inputs(c: &Circuit, id: NodeId, out: &mut BTreeSet<VarId>) {
    match &c.nodes()[id] {
        Gate::Input(v) => {
            out.insert(*v);
        }
        gate => {
            for &child in gate.children() {
                subtree_inputs(c, child, out);
            }
        }
    }
}

fn subtree_wires(c: &Circuit, id: NodeId) -> usize {
    let gate = &c.nodes()[id];
    gate.children().len()
        + gate
            .children()
            .iter()
            .map(|&i| subtree_wires(c, i))
            .sum::<usize>()
}

/// Reads `c` as an occur-k formula: maximal ΣΠ subcircuits are the leaves,
/// `+` gates cost 1, power-product gates cost the sum of their labels (a
/// product gate counts every label as 1), a leaf costs its wire count (at
/// least 1). Fails when the gates above the leaves are shared.
pub fn occur_measure(c: &Circuit) -> Result<OccurMeasure, String> {
    let reachable = c.reachable();
    let mut parents = vec![0usize; c.nodes().len()];
    for id in (0..c.nodes().len()).filter(|&i| reachable[i]) {
        for &child in c.nodes()[id].children() {
            if !matches!(c.nodes()[child], Gate::Input(_) | Gate::Const(_)) {
                parents[child] += 1;
            }
        }
    }
    if let Some(id) = parents.iter().position(|&p| p > 1) {
        return Err(format!(
            "node {id} feeds more than one gate; an occur-k formula is a tree"
        ));
    }
    let mut occurrences: BTreeMap<String, usize> = BTreeMap::new();
    let mut leaves = 0;
    fn walk(
        c: &Circuit,
        id: NodeId,
        occurrences: &mut BTreeMap<String, usize>,
        leaves: &mut usize,
    ) -> (usize, usize) {
        if sparse_terms(c, id).is_some() || matches!(c.nodes()[id], Gate::Const(_)) {
            *leaves += 1;
            let mut vars = BTreeSet::new();
            subtree_inputs(c, id, &mut vars);
            for v in vars {
                *occurrences
                    .entry(c.arena().name(v).to_string())
                    .or_default() += 1;
            }
            return (subtree_wires(c, id).max(1), 0);
        }
        let gate = &c.nodes()[id];
        let own = match gate {
            Gate::Add { .. } => 1,
            Gate::Mul { children } => children.len(),
            Gate::Pow { exps, .. } => exps.iter().map(|&e| e as usize).sum(),
            Gate::Input(_) | Gate::Const(_) => unreachable!("inputs and constants are leaves"),
        };
        let mut size = own;
        let mut layers = 0;
        for &child in gate.children() {
            let (s, l) = walk(c, child, occurrences, leaves);
            size += s;
            layers = layers.max(l);
        }
        (size, layers + 1)
    }
    let (size, layers) = walk(c, c.output(), &mut occurrences, &mut leaves);
    Ok(OccurMeasure {
        size,
        depth: layers + 2,
        leaves,
        occurrences,
    })
}

/// Structural membership check of `member` in `desc`.
pub fn validate_class(member: &ClassMember, desc: &ClassDescriptor) -> ValidationReport {
    let mut findings = Vec::new();
    if let Err(e) = desc.check() {
        findings.push(e);
        return ValidationReport::from_findings(findings);
    }
    match (desc, member) {
        (ClassDescriptor::CommRoAbpFamily { w, d }, ClassMember::CommRoAbp(a)) => {
            if a.width() > *w {
                findings.push(format!("width {} exceeds w={w}", a.width()));
            }
            if a.degree() > *d {
                findings.push(format!("univariate degree {} exceeds d={d}", a.degree()));
            }
        }
        (ClassDescriptor::RoAbp { w, d, order }, ClassMember::RoAbp(a)) => {
            if a.width() > *w {
                findings.push(format!("width {} exceeds w={w}", a.width()));
            }
            if a.degree() > *d {
                findings.push(format!("entry degree {} exceeds d={d}", a.degree()));
            }
            match resolve_order(order.as_deref(), a.arena().len()) {
                Ok(want) if a.order() != want => {
                    findings.push("layers are not read in the declared order".into())
                }
                Ok(_) => {}
                Err(e) => findings.push(e.to_string()),
            }
        }
        (_, ClassMember::Circuit(c)) => validate_circuit(c, desc, &mut findings),
        (desc, _) => findings.push(format!(
            "member representation does not match class `{desc}`"
        )),
    }
    ValidationReport::from_findings(findings)
}

fn top_terms(c: &Circuit) -> (Vec<NodeId>, bool) {
    match &c.nodes()[c.output()] {
        Gate::Add {
            children, constant, ..
        } => (children.clone(), !constant.is_zero()),
        Gate::Const(v) => (vec![], !v.is_zero()),
        _ => (vec![c.output()], false),
    }
}

fn validate_circuit(c: &Circuit, desc: &ClassDescriptor, findings: &mut Vec<String>) {
    let degrees = c.node_degrees();
    let (terms, has_constant) = top_terms(c);
    let fan_in = terms.len() + usize::from(has_constant);
    match desc {
        ClassDescriptor::SigmaPi { s, deg } => {
            match sparse_terms(c, c.output()) {
                Some(t) if t > *s => findings.push(format!("{t} terms exceed s={s}")),
                Some(_) => {}
                None => findings.push("not a sum of monomials".into()),
            }
            if degrees[c.output()] > *deg as u64 {
                findings.push(format!("degree {} exceeds deg={deg}", degrees[c.output()]));
            }
        }
        ClassDescriptor::SigmaKPiSigma { k, d } => {
            if fan_in > *k {
                findings.push(format!("top fan-in {fan_in} exceeds k={k}"));
            }
            for &t in &terms {
                let factors: Vec<NodeId> = match &c.nodes()[t] {
                    Gate::Mul { children } => children.clone(),
                    _ => vec![t],
                };
                if factors.len() > *d {
                    findings.push(format!(
                        "product gate {t} has {} factors, more than d={d}",
                        factors.len()
                    ));
                }
                if let Some(&bad) = factors.iter().find(|&&f| !is_affine(c, f)) {
                    findings.push(format!("factor {bad} of product gate {t} is not affine"));
                }
            }
        }
        ClassDescriptor::Smesp { t, s } => {
            if fan_in > *s {
                findings.push(format!("top fan-in {fan_in} exceeds s={s}"));
            }
            for &term in &terms {
                let parts: Vec<NodeId> = match &c.nodes()[term] {
                    Gate::Mul { children } => children.clone(),
                    _ => vec![term],
                };
                let powers: Vec<NodeId> = parts
                    .iter()
                    .copied()
                    .filter(|&p| !is_monomial_gate(c, p))
                    .collect();
                let ok = powers.len() <= 1
                    && powers.iter().all(|&p| match &c.nodes()[p] {
                        Gate::Pow { children, .. } => {
                            children.len() == 1
                                && degrees[children[0]] <= *t as u64
                                && sparse_terms(c, children[0]).is_some()
                        }
                        _ => degrees[p] <= *t as u64 && sparse_terms(c, p).is_some(),
                    });
                if !ok {
                    findings.push(format!(
                        "term {term} is not a monomial times a power of a degree-{t} polynomial"
                    ));
                }
            }
        }
        ClassDescriptor::OccurK { depth, k, s } => match occur_measure(c) {
            Err(e) => findings.push(e),
            Ok(m) => {
                if m.depth > *depth {
                    findings.push(format!("depth {} exceeds D={depth}", m.depth));
                }
                if m.size > *s {
                    findings.push(format!("size {} exceeds s={s}", m.size));
                }
                for (name, count) in &m.occurrences {
                    if count > k {
                        findings.push(format!("{name} occurs in {count} leaves, more than k={k}"));
                    }
                }
            }
        },
        ClassDescriptor::SparseCompose { m, s, deg } => {
            let inner = outer_inputs(c, &terms, findings);
            if inner.len() > *m {
                findings.push(format!("{} inner polynomials exceed m={m}", inner.len()));
            }
            for &node in &inner {
                match sparse_terms(c, node) {
                    Some(t) if t > *s => findings.push(format!(
                        "inner polynomial {node} has {t} terms, more than s={s}"
                    )),
                    Some(_) => {}
                    None => findings.push(format!("inner node {node} is not sparse")),
                }
            }
            check_outer_degree(c, &terms, *deg, findings);
        }
        ClassDescriptor::LowTrdeg { k, d, m } => {
            let inner = outer_inputs(c, &terms, findings);
            if inner.len() > *m {
                findings.push(format!("{} products exceed m={m}", inner.len()));
            }
            let mut forms = BTreeSet::new();
            for &node in &inner {
                let factors: Vec<NodeId> = match &c.nodes()[node] {
                    Gate::Mul { children } => children.clone(),
                    _ => vec![node],
                };
                if factors.len() > *d {
                    findings.push(format!("product {node} has more than d={d} factors"));
                }
                for f in factors {
                    if is_affine(c, f) {
                        forms.insert(f);
                    } else {
                        findings.push(format!("factor {f} is not affine"));
                    }
                }
            }
            if forms.len() > *k {
                findings.push(format!(
                    "{} distinct affine forms exceed k={k}",
                    forms.len()
                ));
            }
        }
        ClassDescriptor::CommRoAbpFamily { .. } | ClassDescriptor::RoAbp { .. } => {
            findings.push(format!("class `{desc}` expects a branching-program member"));
        }
    }
}

/// The distinct nodes the outer polynomial is applied to.
fn outer_inputs(c: &Circuit, terms: &[NodeId], findings: &mut Vec<String>) -> BTreeSet<NodeId> {
    let mut inner = BTreeSet::new();
    for &t in terms {
        match &c.nodes()[t] {
            Gate::Pow { children, .. } | Gate::Mul { children } => {
                inner.extend(children.iter().copied())
            }
            _ => findings.push(format!("outer term {t} is not a power-product")),
        }
    }
    inner
}

fn check_outer_degree(c: &Circuit, terms: &[NodeId], deg: u32, findings: &mut Vec<String>) {
    for &t in terms {
        let d: u64 = match &c.nodes()[t] {
            Gate::Pow { exps, .. } => exps.iter().map(|&e| e as u64).sum(),
            Gate::Mul { children } => children.len() as u64,
            _ => continue,
        };
        if d > deg as u64 {
            findings.push(format!(
                "outer term {t} has degree {d}, more than deg={deg}"
            ));
        }
    }
}
