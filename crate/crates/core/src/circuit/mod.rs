//! Algebraic circuits over a prime field.
//!
//! A [`Circuit`] is a node list in topological order: every child id is
//! smaller than its parent's id. Gates are weighted sums, products and
//! power-products `g_1^{e_1} ... g_m^{e_m}`.

mod classes;
mod json;
mod roabp;

use std::sync::Arc;

use thiserror::Error;

use crate::field::{FieldElem, PrimeField};
use crate::poly::{Monomial, PolyError, SparsePoly, VarArena, VarId, DEFAULT_TERM_BUDGET};

pub use classes::{
    coefficient_arena, occur_measure, sample_class, validate_class, ClassDescriptor, ClassMember,
    OccurMeasure, ValidationReport,
};
pub use json::CIRCUIT_JSON_VERSION;
pub use roabp::{CommRoAbp, RoAbp, RoAbpLayer};

pub type NodeId = usize;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("node {id}: {reason}")]
    InvalidNode { id: NodeId, reason: String },
    #[error("output node {0} does not exist")]
    BadOutput(NodeId),
    #[error("circuit JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("roABP: {0}")]
    RoAbp(String),
    #[error("class parameters: {0}")]
    Parameters(String),
    #[error("{attempts} consecutive samples of `{class}` were zero; parameters look degenerate")]
    Degenerate { class: String, attempts: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    Input(VarId),
    Const(FieldElem),
    /// `constant + Σ weights[i] * children[i]`.
    Add {
        children: Vec<NodeId>,
        weights: Vec<FieldElem>,
        constant: FieldElem,
    },
    Mul {
        children: Vec<NodeId>,
    },
    /// `Π children[i]^{exps[i]}`.
    Pow {
        children: Vec<NodeId>,
        exps: Vec<u32>,
    },
}

impl Gate {
    pub fn children(&self) -> &[NodeId] {
        match self {
            Gate::Input(_) | Gate::Const(_) => &[],
            Gate::Add { children, .. } | Gate::Mul { children } | Gate::Pow { children, .. } => {
                children
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Gate::Input(_) => "input",
            Gate::Const(_) => "const",
            Gate::Add { .. } => "add",
            Gate::Mul { .. } => "mul",
            Gate::Pow { .. } => "pow",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    field: PrimeField,
    arena: Arc<VarArena>,
    nodes: Vec<Gate>,
    output: NodeId,
}

/// Size and depth as plain wire counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measure {
    pub size: usize,
    pub depth: usize,
}

impl Circuit {
    pub fn new(
        field: PrimeField,
        arena: Arc<VarArena>,
        nodes: Vec<Gate>,
        output: NodeId,
    ) -> Result<Self, CircuitError> {
        for (id, gate) in nodes.iter().enumerate() {
            let bad = |reason: String| CircuitError::InvalidNode { id, reason };
            if let Some(&c) = gate.children().iter().find(|&&c| c >= id) {
                return Err(bad(format!("child {c} does not precede its parent")));
            }
            match gate {
                Gate::Input(v) if v.index() >= arena.len() => {
                    return Err(bad(format!("input variable {} is outside the arena", v.0)))
                }
                Gate::Add {
                    children, weights, ..
                } if children.len() != weights.len() => {
                    return Err(bad("add gate needs one weight per child".into()))
                }
                Gate::Mul { children } | Gate::Pow { children, .. } if children.is_empty() => {
                    return Err(bad("product gate without children".into()))
                }
                Gate::Pow { children, exps } if children.len() != exps.len() => {
                    return Err(bad("power-product gate needs one label per child".into()))
                }
                Gate::Pow { exps, .. } if exps.contains(&0) => {
                    return Err(bad("power-product labels must be >= 1".into()))
                }
                _ => {}
            }
        }
        if output >= nodes.len() {
            return Err(CircuitError::BadOutput(output));
        }
        Ok(Circuit {
            field,
            arena,
            nodes,
            output,
        })
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn arena(&self) -> &Arc<VarArena> {
        &self.arena
    }

    pub fn arity(&self) -> usize {
        self.arena.len()
    }

    pub fn nodes(&self) -> &[Gate] {
        &self.nodes
    }

    pub fn output(&self) -> NodeId {
        self.output
    }

    /// The identically zero circuit over `arena`.
    pub fn zero(field: &PrimeField, arena: &Arc<VarArena>) -> Self {
        Circuit {
            field: field.clone(),
            arena: arena.clone(),
            nodes: vec![Gate::Const(FieldElem::ZERO)],
            output: 0,
        }
    }

    /// `reachable[id]` is true when `id` feeds the output.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        seen[self.output] = true;
        for id in (0..=self.output).rev() {
            if seen[id] {
                for &c in self.nodes[id].children() {
                    seen[c] = true;
                }
            }
        }
        seen
    }

    /// Evaluates at a point indexed by variable id.
    pub fn eval(&self, point: &[FieldElem]) -> Result<FieldElem, CircuitError> {
        let f = &self.field;
        let mut values = vec![FieldElem::ZERO; self.output + 1];
        for id in 0..=self.output {
            values[id] = match &self.nodes[id] {
                Gate::Input(v) => *point.get(v.index()).ok_or_else(|| {
                    PolyError::UnassignedVariable(self.arena.name(*v).to_string())
                })?,
                Gate::Const(c) => *c,
                Gate::Add {
                    children,
                    weights,
                    constant,
                } => children
                    .iter()
                    .zip(weights)
                    .fold(*constant, |acc, (&c, &w)| f.add(acc, f.mul(w, values[c]))),
                Gate::Mul { children } => children
                    .iter()
                    .fold(f.one(), |acc, &c| f.mul(acc, values[c])),
                Gate::Pow { children, exps } => {
                    children.iter().zip(exps).fold(f.one(), |acc, (&c, &e)| {
                        f.mul(acc, f.pow(values[c], e as u64))
                    })
                }
            };
        }
        Ok(values[self.output])
    }

    /// Substitutes `inputs[v]` for each input variable `v` and expands. All
    /// images must live in `target`.
    pub fn compose(
        &self,
        inputs: &[SparsePoly],
        target: &Arc<VarArena>,
        budget: usize,
    ) -> Result<SparsePoly, CircuitError> {
        if inputs.len() != self.arena.len() {
            return Err(PolyError::ArityMismatch {
                expected: self.arena.len(),
                got: inputs.len(),
            }
            .into());
        }
        let f = &self.field;
        let reachable = self.reachable();
        let mut values: Vec<Option<SparsePoly>> = vec![None; self.output + 1];
        let too_large = |p: &SparsePoly| p.sparsity() > budget;
        for id in 0..=self.output {
            if !reachable[id] {
                continue;
            }
            let get = |c: NodeId| values[c].as_ref().expect("children are computed first");
            let value = match &self.nodes[id] {
                Gate::Input(v) => inputs[v.index()].clone(),
                Gate::Const(c) => SparsePoly::constant(f, target, *c),
                Gate::Add {
                    children,
                    weights,
                    constant,
                } => {
                    let mut acc = SparsePoly::constant(f, target, *constant);
                    for (&c, &w) in children.iter().zip(weights) {
                        acc.add_scaled_unchecked(get(c), w);
                        if too_large(&acc) {
                            return Err(PolyError::ExpansionTooLarge { budget }.into());
                        }
                    }
                    acc
                }
                Gate::Mul { children } => {
                    let mut acc = SparsePoly::one(f, target);
                    for &c in children {
                        acc = acc.mul_budgeted(get(c), budget)?;
                    }
                    acc
                }
                Gate::Pow { children, exps } => {
                    let mut acc = SparsePoly::one(f, target);
                    for (&c, &e) in children.iter().zip(exps) {
                        acc = acc.mul_budgeted(&get(c).pow(e, budget)?, budget)?;
                    }
                    acc
                }
            };
            values[id] = Some(value);
        }
        Ok(values[self.output].take().expect("output is reachable"))
    }

    /// The polynomial computed, over the circuit's own arena.
    pub fn expand(&self) -> Result<SparsePoly, CircuitError> {
        self.expand_budgeted(DEFAULT_TERM_BUDGET)
    }

    pub fn expand_budgeted(&self, budget: usize) -> Result<SparsePoly, CircuitError> {
        let inputs: Vec<SparsePoly> = self
            .arena
            .vars()
            .map(|v| SparsePoly::var(&self.field, &self.arena, v))
            .collect();
        self.compose(&inputs, &self.arena, budget)
    }

    /// Syntactic upper bound on the total degree.
    pub fn degree_bound(&self) -> u64 {
        self.node_degrees()[self.output]
    }

    /// Syntactic degree bound of every node up to the output.
    pub fn node_degrees(&self) -> Vec<u64> {
        let mut deg = vec![0u64; self.output + 1];
        for id in 0..=self.output {
            deg[id] = match &self.nodes[id] {
                Gate::Input(_) => 1,
                Gate::Const(_) => 0,
                Gate::Add { children, .. } => children.iter().map(|&c| deg[c]).max().unwrap_or(0),
                Gate::Mul { children } => children
                    .iter()
                    .map(|&c| deg[c])
                    .fold(0, u64::saturating_add),
                Gate::Pow { children, exps } => children
                    .iter()
                    .zip(exps)
                    .map(|(&c, &e)| deg[c].saturating_mul(e as u64))
                    .fold(0, u64::saturating_add),
            };
        }
        deg
    }

    /// Wire count and longest input-to-output path over the nodes feeding the
    /// output.
    pub fn measure(&self) -> Measure {
        let reachable = self.reachable();
        let mut depth = vec![0usize; self.output + 1];
        let mut size = 0;
        for id in 0..=self.output {
            if !reachable[id] {
                continue;
            }
            let children = self.nodes[id].children();
            size += children.len();
            depth[id] = children.iter().map(|&c| depth[c] + 1).max().unwrap_or(0);
        }
        Measure {
            size,
            depth: depth[self.output],
        }
    }

    /// Replaces the gate at `id`, keeping the topological invariant.
    pub fn with_gate(&self, id: NodeId, gate: Gate) -> Result<Circuit, CircuitError> {
        let mut nodes = self.nodes.clone();
        nodes[id] = gate;
        Circuit::new(self.field.clone(), self.arena.clone(), nodes, self.output)
    }
}

/// Appends gates to a node list, sharing one node per input variable.
pub struct CircuitBuilder {
    field: PrimeField,
    arena: Arc<VarArena>,
    nodes: Vec<Gate>,
    inputs: Vec<Option<NodeId>>,
}

impl CircuitBuilder {
    pub fn new(field: &PrimeField, arena: &Arc<VarArena>) -> Self {
        CircuitBuilder {
            field: field.clone(),
            arena: arena.clone(),
            nodes: Vec::new(),
            inputs: vec![None; arena.len()],
        }
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn arena(&self) -> &Arc<VarArena> {
        &self.arena
    }

    fn push(&mut self, gate: Gate) -> NodeId {
        self.nodes.push(gate);
        self.nodes.len() - 1
    }

    pub fn input(&mut self, v: VarId) -> NodeId {
        if let Some(id) = self.inputs[v.index()] {
            return id;
        }
        let id = self.push(Gate::Input(v));
        self.inputs[v.index()] = Some(id);
        id
    }

    pub fn constant(&mut self, c: FieldElem) -> NodeId {
        self.push(Gate::Const(c))
    }

    pub fn add(&mut self, children: Vec<NodeId>) -> NodeId {
        let weights = vec![FieldElem::ONE; children.len()];
        self.linear(children, weights, FieldElem::ZERO)
    }

    pub fn linear(
        &mut self,
        children: Vec<NodeId>,
        weights: Vec<FieldElem>,
        constant: FieldElem,
    ) -> NodeId {
        self.push(Gate::Add {
            children,
            weights,
            constant,
        })
    }

    pub fn mul(&mut self, children: Vec<NodeId>) -> NodeId {
        self.push(Gate::Mul { children })
    }

    pub fn pow(&mut self, children: Vec<NodeId>, exps: Vec<u32>) -> NodeId {
        self.push(Gate::Pow { children, exps })
    }

    /// A monomial gate, or a bare input for a degree-1 monomial. `None` for
    /// the constant monomial.
    pub fn monomial(&mut self, m: &Monomial) -> Option<NodeId> {
        match m.exponents() {
            [] => None,
            [(v, 1)] => Some(self.input(*v)),
            exps => {
                let (children, labels) = exps.iter().map(|&(v, e)| (self.input(v), e)).unzip();
                Some(self.pow(children, labels))
            }
        }
    }

    /// A ΣΠ subcircuit for `p`: one add gate over monomial gates.
    pub fn sparse(&mut self, p: &SparsePoly) -> NodeId {
        let mut children = Vec::new();
        let mut weights = Vec::new();
        let mut constant = FieldElem::ZERO;
        for (m, c) in p.terms().rev() {
            match self.monomial(m) {
                Some(id) => {
                    children.push(id);
                    weights.push(c);
                }
                None => constant = c,
            }
        }
        self.linear(children, weights, constant)
    }

    pub fn finish(self, output: NodeId) -> Result<Circuit, CircuitError> {
        Circuit::new(self.field, self.arena, self.nodes, output)
    }
}
