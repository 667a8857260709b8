//! Sparse multivariate polynomials over a prime field.
//!
//! A [`SparsePoly`] is a map from [`Monomial`] to nonzero coefficient, over a
//! named variable arena. Terms are kept in graded-lexicographic order so
//! equality and the text form are canonical.

mod coeff;
mod text;
mod univariate;

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::field::{FieldElem, PrimeField};

pub use coeff::{subset_from_index, subset_index, CoeffVector, MAX_DENSE_BLOCK};
pub use univariate::UniPoly;

/// Symbolic operations refuse to produce more terms than this by default.
pub const DEFAULT_TERM_BUDGET: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("operands live in different variable arenas")]
    ArenaMismatch,
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("variable `{0}` is not assigned")]
    UnassignedVariable(String),
    #[error("variable `{0}` is not in the arena")]
    UnknownVariable(String),
    #[error("expansion too large: more than {budget} terms")]
    ExpansionTooLarge { budget: usize },
    #[error("polynomial is not multilinear in `{0}`")]
    NotMultilinear(String),
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("block of {0} variables is too large for a dense coefficient vector")]
    BlockTooLarge(usize),
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered list of variable names. Polynomials over the same arena share it
/// by `Arc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarArena {
    names: Vec<String>,
    index: HashMap<String, VarId>,
}

impl VarArena {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Arc<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), VarId(i as u32)))
            .collect();
        Arc::new(VarArena { names, index })
    }

    /// `prefix1, ..., prefixN`.
    pub fn numbered(prefix: &str, count: usize) -> Arc<Self> {
        Self::new((1..=count).map(|i| format!("{prefix}{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.names.len() as u32).map(VarId)
    }
}

fn same_arena(a: &Arc<VarArena>, b: &Arc<VarArena>) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

/// A power product `Π x_v^{e_v}`, stored as `(var, exponent)` pairs sorted by
/// variable with no zero exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    degree: u32,
    exps: SmallVec<[(VarId, u32); 4]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: VarId) -> Self {
        Self::power(v, 1)
    }

    pub fn power(v: VarId, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        let mut exps = SmallVec::new();
        exps.push((v, e));
        Monomial { degree: e, exps }
    }

    /// Builds from arbitrary `(var, exp)` pairs, merging duplicates.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_insert(0) += e;
        }
        let exps: SmallVec<[(VarId, u32); 4]> = map.into_iter().filter(|&(_, e)| e > 0).collect();
        let degree = exps.iter().map(|&(_, e)| e).sum();
        Monomial { degree, exps }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[(VarId, u32)] {
        &self.exps
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.exps
            .iter()
            .find(|&&(u, _)| u == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn support_size(&self) -> usize {
        self.exps.len()
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = SmallVec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (a, b) = (self.exps[i], other.exps[j]);
            match a.0.cmp(&b.0) {
                Ordering::Less => {
                    exps.push(a);
                    i += 1;
                }
                Ordering::Greater => {
                    exps.push(b);
                    j += 1;
                }
                Ordering::Equal => {
                    exps.push((a.0, a.1 + b.1));
                    i += 1;
                    j += 1;
                }
            }
        }
        exps.extend_from_slice(&self.exps[i..]);
        exps.extend_from_slice(&other.exps[j..]);
        Monomial {
            degree: self.degree + other.degree,
            exps,
        }
    }

    /// Splits into the part over `block` (returned first) and the rest.
    fn split(&self, in_block: impl Fn(VarId) -> bool) -> (Monomial, Monomial) {
        let mut inside = SmallVec::new();
        let mut outside = SmallVec::new();
        for &(v, e) in &self.exps {
            if in_block(v) {
                inside.push((v, e));
            } else {
                outside.push((v, e));
            }
        }
        let di = inside.iter().map(|&(_, e)| e).sum();
        let dout = outside.iter().map(|&(_, e)| e).sum();
        (
            Monomial {
                degree: di,
                exps: inside,
            },
            Monomial {
                degree: dout,
                exps: outside,
            },
        )
    }

    fn without(&self, v: VarId) -> (u32, Monomial) {
        let e = self.exponent(v);
        let exps: SmallVec<[(VarId, u32); 4]> =
            self.exps.iter().copied().filter(|&(u, _)| u != v).collect();
        (
            e,
            Monomial {
                degree: self.degree - e,
                exps,
            },
        )
    }
}

impl Ord for Monomial {
    /// Graded lexicographic with `x_0 > x_1 > ...`.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| {
            for (a, b) in self.exps.iter().zip(other.exps.iter()) {
                if a.0 != b.0 {
                    // the side holding the smaller variable id is larger
                    return b.0.cmp(&a.0);
                }
                if a.1 != b.1 {
                    return a.1.cmp(&b.1);
                }
            }
            self.exps.len().cmp(&other.exps.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A multivariate polynomial with nonzero coefficients only.
#[derive(Clone)]
pub struct SparsePoly {
    field: PrimeField,
    arena: Arc<VarArena>,
    terms: BTreeMap<Monomial, FieldElem>,
}

impl PartialEq for SparsePoly {
    fn eq(&self, other: &Self) -> bool {
        self.field.modulus() == other.field.modulus()
            && same_arena(&self.arena, &other.arena)
            && self.terms == other.terms
    }
}

impl Eq for SparsePoly {}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly({self})")
    }
}

impl SparsePoly {
    pub fn zero(field: &PrimeField, arena: &Arc<VarArena>) -> Self {
        SparsePoly {
            field: field.clone(),
            arena: arena.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: &PrimeField, arena: &Arc<VarArena>, c: FieldElem) -> Self {
        Self::monomial(field, arena, Monomial::one(), c)
    }

    pub fn one(field: &PrimeField, arena: &Arc<VarArena>) -> Self {
        Self::constant(field, arena, FieldElem::ONE)
    }

    pub fn var(field: &PrimeField, arena: &Arc<VarArena>, v: VarId) -> Self {
        Self::monomial(field, arena, Monomial::var(v), FieldElem::ONE)
    }

    pub fn monomial(field: &PrimeField, arena: &Arc<VarArena>, m: Monomial, c: FieldElem) -> Self {
        let mut p = Self::zero(field, arena);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms(
        field: &PrimeField,
        arena: &Arc<VarArena>,
        terms: impl IntoIterator<Item = (Monomial, FieldElem)>,
    ) -> Self {
        let mut p = Self::zero(field, arena);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn arena(&self) -> &Arc<VarArena> {
        &self.arena
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of nonzero terms.
    pub fn sparsity(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, FieldElem)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> FieldElem {
        self.terms.get(m).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn constant_term(&self) -> FieldElem {
        self.coefficient(&Monomial::one())
    }

    /// Returns the constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<FieldElem> {
        match self.terms.len() {
            0 => Some(FieldElem::ZERO),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Largest total degree of a term restricted to the variables in `vars`.
    pub fn degree_in(&self, vars: &[VarId]) -> u32 {
        self.terms
            .keys()
            .map(|m| {
                m.exponents()
                    .iter()
                    .filter(|(v, _)| vars.contains(v))
                    .map(|&(_, e)| e)
                    .sum()
            })
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        let field = &self.field;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = field.add(*e.get(), c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn compatible(&self, other: &Self) -> Result<(), PolyError> {
        if self.field.modulus() != other.field.modulus() {
            return Err(PolyError::FieldMismatch);
        }
        if !same_arena(&self.arena, &other.arena) {
            return Err(PolyError::ArenaMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.compatible(other)?;
        let mut out = self.clone();
        out.add_assign_unchecked(other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), self.field.neg(c));
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.compatible(other)?;
        self.mul_budgeted(other, DEFAULT_TERM_BUDGET)
    }

    pub(crate) fn add_assign_unchecked(&mut self, other: &Self) {
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    /// `self += c * other`.
    pub(crate) fn add_scaled_unchecked(&mut self, other: &Self, c: FieldElem) {
        if c.is_zero() {
            return;
        }
        for (m, &d) in &other.terms {
            self.add_term(m.clone(), self.field.mul(c, d));
        }
    }

    pub(crate) fn mul_budgeted(&self, other: &Self, budget: usize) -> Result<Self, PolyError> {
        let mut out = Self::zero(&self.field, &self.arena);
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (ma, &ca) in &small.terms {
            for (mb, &cb) in &large.terms {
                out.add_term(ma.mul(mb), self.field.mul(ca, cb));
            }
            if out.terms.len() > budget {
                return Err(PolyError::ExpansionTooLarge { budget });
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: FieldElem) -> Self {
        let mut out = Self::zero(&self.field, &self.arena);
        if c.is_zero() {
            return out;
        }
        out.terms = self
            .terms
            .iter()
            .map(|(m, &d)| (m.clone(), self.field.mul(c, d)))
            .collect();
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(self.field.neg(FieldElem::ONE))
    }

    pub fn pow(&self, e: u32, budget: usize) -> Result<Self, PolyError> {
        let mut acc = Self::one(&self.field, &self.arena);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_budgeted(&base, budget)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_budgeted(&base, budget)?;
            }
        }
        Ok(acc)
    }

    /// Evaluates at a full assignment indexed by variable id.
    pub fn eval(&self, point: &[FieldElem]) -> Result<FieldElem, PolyError> {
        let f = &self.field;
        let mut acc = FieldElem::ZERO;
        for (m, &c) in &self.terms {
            let mut t = c;
            for &(v, e) in m.exponents() {
                let x = point
                    .get(v.index())
                    .copied()
                    .ok_or_else(|| PolyError::UnassignedVariable(self.arena.name(v).to_string()))?;
                t = f.mul(t, f.pow(x, e as u64));
            }
            acc = f.add(acc, t);
        }
        Ok(acc)
    }

    /// Evaluates at an assignment keyed by variable name.
    pub fn eval_named(&self, point: &BTreeMap<String, FieldElem>) -> Result<FieldElem, PolyError> {
        let mut values = vec![FieldElem::ZERO; self.arena.len()];
        let mut assigned = vec![false; self.arena.len()];
        for (name, &v) in point {
            if let Some(id) = self.arena.lookup(name) {
                values[id.index()] = v;
                assigned[id.index()] = true;
            }
        }
        for m in self.terms.keys() {
            for &(v, _) in m.exponents() {
                if !assigned[v.index()] {
                    return Err(PolyError::UnassignedVariable(
                        self.arena.name(v).to_string(),
                    ));
                }
            }
        }
        self.eval(&values)
    }

    /// Fixes some variables to constants, keeping the arena.
    pub fn partial_eval(&self, fixing: &HashMap<VarId, FieldElem>) -> Self {
        let f = &self.field;
        let mut out = Self::zero(f, &self.arena);
        for (m, &c) in &self.terms {
            let mut coeff = c;
            let mut rest = SmallVec::<[(VarId, u32); 4]>::new();
            for &(v, e) in m.exponents() {
                match fixing.get(&v) {
                    Some(&x) => coeff = f.mul(coeff, f.pow(x, e as u64)),
                    None => rest.push((v, e)),
                }
            }
            let degree = rest.iter().map(|&(_, e)| e).sum();
            out.add_term(Monomial { degree, exps: rest }, coeff);
        }
        out
    }

    /// Composition: replaces each mapped variable with its image. Unmapped
    /// variables must exist by name in `target`.
    pub fn substitute(
        &self,
        map: &HashMap<VarId, SparsePoly>,
        target: &Arc<VarArena>,
        budget: usize,
    ) -> Result<SparsePoly, PolyError> {
        let f = &self.field;
        for image in map.values() {
            if !same_arena(image.arena(), target) {
                return Err(PolyError::ArenaMismatch);
            }
            if image.field.modulus() != f.modulus() {
                return Err(PolyError::FieldMismatch);
            }
        }
        let mut images: HashMap<VarId, SparsePoly> = HashMap::new();
        let mut powers: HashMap<(VarId, u32), SparsePoly> = HashMap::new();
        let mut out = SparsePoly::zero(f, target);
        for (m, &c) in &self.terms {
            let mut term = SparsePoly::constant(f, target, c);
            for &(v, e) in m.exponents() {
                if let Entry::Vacant(slot) = images.entry(v) {
                    slot.insert(match map.get(&v) {
                        Some(p) => p.clone(),
                        None => {
                            let name = self.arena.name(v);
                            let id = target
                                .lookup(name)
                                .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
                            SparsePoly::var(f, target, id)
                        }
                    });
                }
                if let Entry::Vacant(slot) = powers.entry((v, e)) {
                    slot.insert(images[&v].pow(e, budget)?);
                }
                term = term.mul_budgeted(&powers[&(v, e)], budget)?;
                if term.is_zero() {
                    break;
                }
            }
            out.add_assign_unchecked(&term);
            if out.terms.len() > budget {
                return Err(PolyError::ExpansionTooLarge { budget });
            }
        }
        Ok(out)
    }

    /// Formal partial derivative; coefficients are reduced mod `p`.
    pub fn derivative(&self, v: VarId) -> SparsePoly {
        let f = &self.field;
        let mut out = Self::zero(f, &self.arena);
        for (m, &c) in &self.terms {
            let (e, rest) = m.without(v);
            if e == 0 {
                continue;
            }
            let m2 = rest.mul(&Monomial::power(v, e - 1));
            out.add_term(m2, f.mul(c, f.elem(e as u64)));
        }
        out
    }

    /// `f(X + alpha)`, where `alpha` is indexed by variable id.
    pub fn shift_by(&self, alpha: &[FieldElem]) -> Result<SparsePoly, PolyError> {
        if alpha.len() != self.arena.len() {
            return Err(PolyError::ArityMismatch {
                expected: self.arena.len(),
                got: alpha.len(),
            });
        }
        let f = &self.field;
        let map: HashMap<VarId, SparsePoly> = self
            .arena
            .vars()
            .map(|v| {
                let mut p = SparsePoly::var(f, &self.arena, v);
                p.add_term(Monomial::one(), alpha[v.index()]);
                (v, p)
            })
            .collect();
        self.substitute(&map, &self.arena, DEFAULT_TERM_BUDGET)
    }

    /// Smallest support size over all terms.
    pub fn min_support_monomial(&self) -> Result<usize, PolyError> {
        self.terms
            .keys()
            .map(Monomial::support_size)
            .min()
            .ok_or(PolyError::ZeroPolynomial)
    }

    /// Re-expresses the polynomial over another arena containing every used
    /// variable by name.
    pub fn rename_into(&self, target: &Arc<VarArena>) -> Result<SparsePoly, PolyError> {
        let mut out = SparsePoly::zero(&self.field, target);
        for (m, &c) in &self.terms {
            let mut pairs = Vec::with_capacity(m.exps.len());
            for &(v, e) in m.exponents() {
                let name = self.arena.name(v);
                let id = target
                    .lookup(name)
                    .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
                pairs.push((id, e));
            }
            out.add_term(Monomial::from_pairs(pairs), c);
        }
        Ok(out)
    }

    /// Variables that occur in some term.
    pub fn used_vars(&self) -> Vec<VarId> {
        let mut vars: Vec<VarId> = self
            .terms
            .keys()
            .flat_map(|m| m.exponents().iter().map(|&(v, _)| v))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }
}
