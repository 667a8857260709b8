use std::sync::Arc;

use super::{Circuit, CircuitBuilder, CircuitError, NodeId};
use crate::field::{FieldElem, PrimeField};
use crate::poly::{PolyError, SparsePoly, UniPoly, VarArena, VarId};

/// One matrix of a branching program. Entries are univariates in `var`, or
/// constants when `var` is `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoAbpLayer {
    pub var: Option<VarId>,
    pub entries: Vec<Vec<UniPoly>>,
}

impl RoAbpLayer {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    fn degree(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .map(UniPoly::degree)
            .max()
            .unwrap_or(0)
    }
}

/// A read-once oblivious ABP: `F = (M_1 ⋯ M_L)_{1,1}`. Layers may be
/// rectangular as long as consecutive shapes chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoAbp {
    field: PrimeField,
    arena: Arc<VarArena>,
    layers: Vec<RoAbpLayer>,
}

impl RoAbp {
    pub fn new(
        field: &PrimeField,
        arena: &Arc<VarArena>,
        layers: Vec<RoAbpLayer>,
    ) -> Result<Self, CircuitError> {
        let mut seen = vec![false; arena.len()];
        for (i, layer) in layers.iter().enumerate() {
            if layer.rows() == 0 || layer.entries.iter().any(|row| row.len() != layer.cols()) {
                return Err(CircuitError::RoAbp(format!(
                    "layer {} is not a nonempty rectangular matrix",
                    i + 1
                )));
            }
            if i > 0 && layers[i - 1].cols() != layer.rows() {
                return Err(CircuitError::RoAbp(format!(
                    "layers {} and {} do not chain",
                    i,
                    i + 1
                )));
            }
            if let Some(v) = layer.var {
                if v.index() >= arena.len() {
                    return Err(CircuitError::RoAbp(format!(
                        "layer {} reads a variable outside the arena",
                        i + 1
                    )));
                }
                if std::mem::replace(&mut seen[v.index()], true) {
                    return Err(CircuitError::RoAbp(format!(
                        "variable `{}` is read twice",
                        arena.name(v)
                    )));
                }
            }
        }
        Ok(RoAbp {
            field: field.clone(),
            arena: arena.clone(),
            layers,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn arena(&self) -> &Arc<VarArena> {
        &self.arena
    }

    pub fn layers(&self) -> &[RoAbpLayer] {
        &self.layers
    }

    pub fn width(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.rows().max(l.cols()))
            .max()
            .unwrap_or(0)
    }

    /// Largest entry degree.
    pub fn degree(&self) -> usize {
        self.layers
            .iter()
            .map(RoAbpLayer::degree)
            .max()
            .unwrap_or(0)
    }

    /// Variables in reading order.
    pub fn order(&self) -> Vec<VarId> {
        self.layers.iter().filter_map(|l| l.var).collect()
    }

    fn source_row<T: Clone>(&self, one: T, zero: T) -> Vec<T> {
        let mut row = vec![zero; self.layers.first().map_or(1, RoAbpLayer::rows)];
        row[0] = one;
        row
    }

    pub fn eval(&self, point: &[FieldElem]) -> Result<FieldElem, CircuitError> {
        let f = &self.field;
        let mut row = self.source_row(f.one(), f.zero());
        for layer in &self.layers {
            let x = match layer.var {
                Some(v) => *point
                    .get(v.index())
                    .ok_or_else(|| PolyError::UnassignedVariable(self.arena.name(v).to_string()))?,
                None => f.zero(),
            };
            let mut next = vec![f.zero(); layer.cols()];
            for (r, entries) in layer.entries.iter().enumerate() {
                if row[r].is_zero() {
                    continue;
                }
                for (c, entry) in entries.iter().enumerate() {
                    next[c] = f.add(next[c], f.mul(row[r], entry.eval(f, x)));
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    /// The `(1,1)` entry of the ordered matrix product.
    pub fn expand(&self, budget: usize) -> Result<SparsePoly, CircuitError> {
        let f = &self.field;
        let one = SparsePoly::one(f, &self.arena);
        let zero = SparsePoly::zero(f, &self.arena);
        let mut row = self.source_row(one, zero.clone());
        for layer in &self.layers {
            let mut next = vec![zero.clone(); layer.cols()];
            for (r, entries) in layer.entries.iter().enumerate() {
                if row[r].is_zero() {
                    continue;
                }
                for (c, entry) in entries.iter().enumerate() {
                    let label = match layer.var {
                        Some(v) => entry.to_sparse(f, &self.arena, v),
                        None => SparsePoly::constant(f, &self.arena, entry.eval(f, f.zero())),
                    };
                    let term = row[r].mul_budgeted(&label, budget)?;
                    next[c].add_assign_unchecked(&term);
                    if next[c].sparsity() > budget {
                        return Err(PolyError::ExpansionTooLarge { budget }.into());
                    }
                }
            }
            row = next;
        }
        Ok(row.swap_remove(0))
    }

    /// The same program as a circuit: one add gate per matrix-vector entry.
    pub fn to_circuit(&self) -> Result<Circuit, CircuitError> {
        let f = &self.field;
        let mut b = CircuitBuilder::new(f, &self.arena);
        let one = b.constant(f.one());
        let mut row: Vec<Option<NodeId>> = self.source_row(Some(one), None);
        for layer in &self.layers {
            let mut next = Vec::with_capacity(layer.cols());
            for c in 0..layer.cols() {
                let mut children = Vec::new();
                for (r, entries) in layer.entries.iter().enumerate() {
                    let (Some(prev), false) = (row[r], entries[c].is_zero()) else {
                        continue;
                    };
                    let label = univariate_node(&mut b, f, &entries[c], layer.var);
                    children.push(b.mul(vec![prev, label]));
                }
                next.push(if children.is_empty() {
                    None
                } else {
                    Some(b.add(children))
                });
            }
            row = next;
        }
        let out = match row[0] {
            Some(id) => id,
            None => b.constant(f.zero()),
        };
        b.finish(out)
    }
}

fn univariate_node(
    b: &mut CircuitBuilder,
    f: &PrimeField,
    p: &UniPoly,
    var: Option<VarId>,
) -> NodeId {
    let Some(v) = var else {
        return b.constant(p.eval(f, f.zero()));
    };
    let x = b.input(v);
    let mut children = Vec::new();
    let mut weights = Vec::new();
    for (k, &a) in p.coeffs().iter().enumerate().skip(1) {
        if a.is_zero() {
            continue;
        }
        children.push(if k == 1 {
            x
        } else {
            b.pow(vec![x], vec![k as u32])
        });
        weights.push(a);
    }
    let constant = p.coeffs().first().copied().unwrap_or(FieldElem::ZERO);
    b.linear(children, weights, constant)
}

/// `Σ_m c_m Π_i u_{m,i}(X_i)`: width `w` in every variable order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommRoAbp {
    field: PrimeField,
    arena: Arc<VarArena>,
    coeffs: Vec<FieldElem>,
    factors: Vec<Vec<UniPoly>>,
}

impl CommRoAbp {
    pub fn new(
        field: &PrimeField,
        arena: &Arc<VarArena>,
        coeffs: Vec<FieldElem>,
        factors: Vec<Vec<UniPoly>>,
    ) -> Result<Self, CircuitError> {
        if coeffs.len() != factors.len() || coeffs.is_empty() {
            return Err(CircuitError::RoAbp(
                "need one nonempty factor list per coefficient".into(),
            ));
        }
        if factors.iter().any(|u| u.len() != arena.len()) {
            return Err(CircuitError::RoAbp(
                "every product needs one univariate per variable".into(),
            ));
        }
        Ok(CommRoAbp {
            field: field.clone(),
            arena: arena.clone(),
            coeffs,
            factors,
        })
    }

    pub fn arena(&self) -> &Arc<VarArena> {
        &self.arena
    }

    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .flatten()
            .map(UniPoly::degree)
            .max()
            .unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn factors(&self) -> &[Vec<UniPoly>] {
        &self.factors
    }

    /// The width-`w` program reading variables in `order` (0-based ids).
    pub fn to_roabp(&self, order: &[VarId]) -> Result<RoAbp, CircuitError> {
        let n = self.arena.len();
        let w = self.width();
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != self.arena.vars().collect::<Vec<_>>() {
            return Err(CircuitError::RoAbp(
                "order must be a permutation of the variables".into(),
            ));
        }
        let zero = UniPoly::default();
        let mut layers = Vec::with_capacity(n);
        for (pos, &v) in order.iter().enumerate() {
            let u = |m: usize| self.factors[m][v.index()].clone();
            let entries = match (pos == 0, pos + 1 == n) {
                (true, true) => {
                    let total = (0..w).fold(UniPoly::default(), |acc, m| {
                        let t = u(m).scale(&self.field, self.coeffs[m]);
                        add_uni(&self.field, &acc, &t)
                    });
                    vec![vec![total]]
                }
                (true, false) => vec![(0..w)
                    .map(|m| u(m).scale(&self.field, self.coeffs[m]))
                    .collect()],
                (false, true) => (0..w).map(|m| vec![u(m)]).collect(),
                (false, false) => (0..w)
                    .map(|m| {
                        (0..w)
                            .map(|c| if c == m { u(m) } else { zero.clone() })
                            .collect()
                    })
                    .collect(),
            };
            layers.push(RoAbpLayer {
                var: Some(v),
                entries,
            });
        }
        RoAbp::new(&self.field, &self.arena, layers)
    }

    pub fn eval(&self, point: &[FieldElem]) -> Result<FieldElem, CircuitError> {
        let f = &self.field;
        if point.len() < self.arena.len() {
            return Err(PolyError::ArityMismatch {
                expected: self.arena.len(),
                got: point.len(),
            }
            .into());
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&self.factors)
            .fold(f.zero(), |acc, (&c, us)| {
                let prod = us
                    .iter()
                    .zip(point)
                    .fold(c, |p, (u, &x)| f.mul(p, u.eval(f, x)));
                f.add(acc, prod)
            }))
    }

    pub fn expand(&self, budget: usize) -> Result<SparsePoly, CircuitError> {
        let f = &self.field;
        let mut out = SparsePoly::zero(f, &self.arena);
        for (&c, us) in self.coeffs.iter().zip(&self.factors) {
            let mut prod = SparsePoly::constant(f, &self.arena, c);
            for (v, u) in self.arena.vars().zip(us) {
                prod = prod.mul_budgeted(&u.to_sparse(f, &self.arena, v), budget)?;
            }
            out.add_assign_unchecked(&prod);
        }
        Ok(out)
    }

    pub fn to_circuit(&self) -> Result<Circuit, CircuitError> {
        let f = &self.field;
        let mut b = CircuitBuilder::new(f, &self.arena);
        let products: Vec<NodeId> = self
            .factors
            .iter()
            .map(|us| {
                let labels = self
                    .arena
                    .vars()
                    .zip(us)
                    .map(|(v, u)| univariate_node(&mut b, f, u, Some(v)))
                    .collect();
                b.mul(labels)
            })
            .collect();
        let out = b.linear(products, self.coeffs.clone(), f.zero());
        b.finish(out)
    }
}

fn add_uni(f: &PrimeField, a: &UniPoly, b: &UniPoly) -> UniPoly {
    let len = a.coeffs().len().max(b.coeffs().len());
    let at = |p: &UniPoly, i: usize| p.coeffs().get(i).copied().unwrap_or(FieldElem::ZERO);
    UniPoly::new((0..len).map(|i| f.add(at(a, i), at(b, i))).collect())
}
