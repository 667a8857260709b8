//! Circuit JSON:
//!
//! ```json
//! {"version": 1, "vars": ["c1", "c2"], "output": 2,
//!  "nodes": [{"id": 0, "kind": "input", "value": "c1"},
//!            {"id": 1, "kind": "input", "value": "c2"},
//!            {"id": 2, "kind": "add", "children": [0, 1], "labels": [1, 18446744069414584320], "value": 0}]}
//! ```
//!
//! `labels` are edge weights on `add` nodes and exponents on `pow` nodes;
//! `value` is the variable name of an `input`, the constant of a `const`, and
//! the additive constant of an `add`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Circuit, CircuitError, Gate, NodeId};
use crate::field::{FieldElem, PrimeField};
use crate::poly::VarArena;

pub const CIRCUIT_JSON_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    version: u32,
    vars: Vec<String>,
    output: NodeId,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: NodeId,
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<u64>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    value: Value,
}

impl Circuit {
    pub fn to_json_value(&self) -> Value {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, gate)| {
                let (labels, value) = match gate {
                    Gate::Input(v) => (vec![], Value::from(self.arena.name(*v))),
                    Gate::Const(c) => (vec![], Value::from(c.value())),
                    Gate::Add {
                        weights, constant, ..
                    } => (
                        weights.iter().map(|w| w.value()).collect(),
                        Value::from(constant.value()),
                    ),
                    Gate::Mul { .. } => (vec![], Value::Null),
                    Gate::Pow { exps, .. } => {
                        (exps.iter().map(|&e| e as u64).collect(), Value::Null)
                    }
                };
                NodeDoc {
                    id,
                    kind: gate.kind().to_string(),
                    children: gate.children().to_vec(),
                    labels,
                    value,
                }
            })
            .collect();
        let doc = CircuitDoc {
            version: CIRCUIT_JSON_VERSION,
            vars: self.arena.names().to_vec(),
            output: self.output,
            nodes,
        };
        serde_json::to_value(doc).expect("circuit documents serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("circuit documents serialize")
    }

    pub fn from_json(field: &PrimeField, text: &str) -> Result<Circuit, CircuitError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CircuitError::Json(e.to_string()))?;
        Self::from_json_value(field, &value)
    }

    pub fn from_json_value(field: &PrimeField, value: &Value) -> Result<Circuit, CircuitError> {
        let doc: CircuitDoc =
            serde_json::from_value(value.clone()).map_err(|e| CircuitError::Json(e.to_string()))?;
        if doc.version != CIRCUIT_JSON_VERSION {
            return Err(CircuitError::Json(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        let arena: Arc<VarArena> = VarArena::new(doc.vars.iter().cloned());
        if arena.vars().any(|v| arena.lookup(arena.name(v)) != Some(v)) {
            return Err(CircuitError::Json("duplicate variable names".into()));
        }
        let elem = |id: NodeId, v: u64| -> Result<FieldElem, CircuitError> {
            if v >= field.modulus() {
                return Err(CircuitError::InvalidNode {
                    id,
                    reason: format!("{v} is not reduced mod p"),
                });
            }
            Ok(field.elem(v))
        };
        let number = |id: NodeId, v: &Value| -> Result<FieldElem, CircuitError> {
            match v {
                Value::Null => Ok(FieldElem::ZERO),
                Value::Number(n) => {
                    if let Some(u) = n.as_u64() {
                        elem(id, u)
                    } else if let Some(i) = n.as_i64() {
                        Ok(field.from_i64(i))
                    } else {
                        Err(CircuitError::InvalidNode {
                            id,
                            reason: format!("`{n}` is not an integer"),
                        })
                    }
                }
                other => Err(CircuitError::InvalidNode {
                    id,
                    reason: format!("expected a number, got {other}"),
                }),
            }
        };
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for (pos, node) in doc.nodes.into_iter().enumerate() {
            let id = node.id;
            if id != pos {
                return Err(CircuitError::InvalidNode {
                    id,
                    reason: format!("listed at position {pos}"),
                });
            }
            let gate = match node.kind.as_str() {
                "input" => {
                    let name = node
                        .value
                        .as_str()
                        .ok_or_else(|| CircuitError::InvalidNode {
                            id,
                            reason: "input value must be a variable name".into(),
                        })?;
                    let v = arena
                        .lookup(name)
                        .ok_or_else(|| CircuitError::InvalidNode {
                            id,
                            reason: format!("unknown variable `{name}`"),
                        })?;
                    Gate::Input(v)
                }
                "const" => Gate::Const(number(id, &node.value)?),
                "add" => {
                    let weights = if node.labels.is_empty() {
                        vec![FieldElem::ONE; node.children.len()]
                    } else {
                        node.labels
                            .iter()
                            .map(|&w| elem(id, w))
                            .collect::<Result<_, _>>()?
                    };
                    Gate::Add {
                        children: node.children,
                        weights,
                        constant: number(id, &node.value)?,
                    }
                }
                "mul" => Gate::Mul {
                    children: node.children,
                },
                "pow" => {
                    let exps = node
                        .labels
                        .iter()
                        .map(|&e| u32::try_from(e))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| CircuitError::InvalidNode {
                            id,
                            reason: "exponent exceeds 32 bits".into(),
                        })?;
                    Gate::Pow {
                        children: node.children,
                        exps,
                    }
                }
                other => {
                    return Err(CircuitError::InvalidNode {
                        id,
                        reason: format!("unknown kind `{other}`"),
                    })
                }
            };
            nodes.push(gate);
        }
        Circuit::new(field.clone(), arena, nodes, doc.output)
    }
}
