//! Small circuits and roABPs computing `P(x, α)` for a fixed seed `α`, i.e.
//! the polynomial whose coefficient vector is one hitting-set element.
//!
//! Sizes are wire counts. A sum-of-products witness with `m` nonzero products
//! over `n` variables has at most `m (2n + 1)` wires: `n` into each product,
//! at most one per affine factor, and one per product into the output. The
//! FS witness has `w² + (n - 1) w⁴ + w²` edges.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::circuit::{Circuit, CircuitBuilder, RoAbp, RoAbpLayer};
use crate::field::{FieldElem, PrimeField};
use crate::generators::{GeneratorDescriptor, GeneratorError, GeneratorSpec};
use crate::poly::{UniPoly, VarArena, VarId};

pub const WITNESS_JSON_VERSION: u64 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessBody {
    /// A depth-3 `ΣΠΣ` circuit.
    Circuit(Circuit),
    RoAbp(RoAbp),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessArtifact {
    pub generator: GeneratorDescriptor,
    pub alpha: Vec<FieldElem>,
    pub body: WitnessBody,
    pub declared_size: usize,
}

impl WitnessArtifact {
    pub fn kind(&self) -> &'static str {
        match self.body {
            WitnessBody::Circuit(_) => "sps-circuit",
            WitnessBody::RoAbp(_) => "roabp",
        }
    }

    pub fn size_bound(spec: &GeneratorSpec) -> Result<usize, GeneratorError> {
        let n = spec.n();
        match spec.fs() {
            Some(fs) => Ok(2 * fs.w2 + (n - 1) * fs.w2 * fs.w2),
            None => Ok(spec
                .evaluated_products(&vec![FieldElem::ZERO; spec.seed_arity()])?
                .len()
                * (2 * n + 1)),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let mut v = json!({
            "version": WITNESS_JSON_VERSION,
            "kind": self.kind(),
            "generator": self.generator.to_string(),
            "alpha": self.alpha.iter().map(|a| a.value()).collect::<Vec<_>>(),
            "declared_size": self.declared_size,
        });
        match &self.body {
            WitnessBody::Circuit(c) => v["circuit"] = c.to_json_value(),
            WitnessBody::RoAbp(a) => {
                v["width"] = json!(a.width());
                v["layers"] = a
                    .layers()
                    .iter()
                    .map(|l| {
                        json!({
                            "var": l.var.map(|x| a.arena().name(x).to_string()),
                            "entries": l.entries.iter().map(|row| {
                                row.iter().map(|p| p.coeffs().iter().map(|c| c.value()).collect::<Vec<_>>()).collect::<Vec<_>>()
                            }).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
            }
        }
        v
    }

    pub fn from_json(field: &PrimeField, text: &str) -> Result<WitnessArtifact, GeneratorError> {
        let bad = |m: &str| GeneratorError::Parameters(format!("witness JSON: {m}"));
        let v: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
        if v["version"].as_u64() != Some(WITNESS_JSON_VERSION) {
            return Err(bad("unsupported version"));
        }
        let generator: GeneratorDescriptor = v["generator"]
            .as_str()
            .ok_or_else(|| bad("missing `generator`"))?
            .parse()
            .map_err(|e: String| bad(&e))?;
        let element = |x: &Value| -> Result<FieldElem, GeneratorError> {
            let raw = x
                .as_u64()
                .ok_or_else(|| bad("field values must be integers"))?;
            if raw >= field.modulus() {
                return Err(bad("field value is not reduced"));
            }
            Ok(field.elem(raw))
        };
        let alpha = v["alpha"]
            .as_array()
            .ok_or_else(|| bad("missing `alpha`"))?
            .iter()
            .map(element)
            .collect::<Result<Vec<_>, _>>()?;
        let declared_size = v["declared_size"]
            .as_u64()
            .ok_or_else(|| bad("missing `declared_size`"))? as usize;
        let body = match v["kind"].as_str() {
            Some("sps-circuit") => {
                WitnessBody::Circuit(Circuit::from_json_value(field, &v["circuit"])?)
            }
            Some("roabp") => {
                let arena = VarArena::numbered("x", generator.n());
                let layers = v["layers"]
                    .as_array()
                    .ok_or_else(|| bad("missing `layers`"))?
                    .iter()
                    .map(|l| {
                        let var = match &l["var"] {
                            Value::Null => None,
                            Value::String(name) => Some(
                                arena
                                    .lookup(name)
                                    .ok_or_else(|| bad(&format!("unknown variable `{name}`")))?,
                            ),
                            _ => return Err(bad("layer `var` must be a name or null")),
                        };
                        let entries = l["entries"]
                            .as_array()
                            .ok_or_else(|| bad("missing layer entries"))?
                            .iter()
                            .map(|row| {
                                row.as_array()
                                    .ok_or_else(|| bad("matrix rows must be arrays"))?
                                    .iter()
                                    .map(|p| {
                                        let coeffs = p
                                            .as_array()
                                            .ok_or_else(|| bad("entries are coefficient lists"))?;
                                        Ok(UniPoly::new(
                                            coeffs.iter().map(element).collect::<Result<_, _>>()?,
                                        ))
                                    })
                                    .collect::<Result<Vec<_>, GeneratorError>>()
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        Ok(RoAbpLayer { var, entries })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                WitnessBody::RoAbp(RoAbp::new(field, &arena, layers)?)
            }
            _ => return Err(bad("`kind` must be `sps-circuit` or `roabp`")),
        };
        Ok(WitnessArtifact {
            generator,
            alpha,
            body,
            declared_size,
        })
    }

    /// True iff `coeff_x` of the artifact equals the generator image at `α`.
    pub fn verify(&self, field: &PrimeField, budget: usize) -> Result<bool, GeneratorError> {
        let spec = GeneratorSpec::build(&self.generator, field)?;
        witness_verify(self, &spec, budget)
    }
}

/// The `ΣΠΣ` witness of a sum-of-products spec (every kind except FS).
pub fn witness_circuit(
    spec: &GeneratorSpec,
    alpha: &[FieldElem],
) -> Result<WitnessArtifact, GeneratorError> {
    if spec.fs().is_some() {
        return Err(GeneratorError::Parameters(
            "FS witnesses are roABPs; use witness_fs_roabp".into(),
        ));
    }
    let f = spec.field();
    let arena = VarArena::numbered("x", spec.n());
    let mut b = CircuitBuilder::new(f, &arena);
    let mut products = Vec::new();
    let mut weights = Vec::new();
    for (c, factors) in spec.evaluated_products(alpha)? {
        if c.is_zero() {
            continue;
        }
        let affine = factors
            .iter()
            .enumerate()
            .map(|(k, &(a, bk))| {
                if bk.is_zero() {
                    b.constant(a)
                } else {
                    let x = b.input(VarId(k as u32));
                    b.linear(vec![x], vec![bk], a)
                }
            })
            .collect();
        products.push(b.mul(affine));
        weights.push(c);
    }
    let out = b.linear(products, weights, f.zero());
    let circuit = b.finish(out)?;
    let declared_size = circuit.measure().size;
    Ok(WitnessArtifact {
        generator: spec.descriptor().clone(),
        alpha: alpha.to_vec(),
        body: WitnessBody::Circuit(circuit),
        declared_size,
    })
}

/// The width-`w²` roABP computing `P^FS(x, α)`, reading `x` in the spec's
/// layer order.
pub fn witness_fs_roabp(
    spec: &GeneratorSpec,
    alpha: &[FieldElem],
) -> Result<WitnessArtifact, GeneratorError> {
    let fs = spec
        .fs()
        .ok_or_else(|| GeneratorError::Parameters("witness_fs_roabp needs an fs spec".into()))?;
    if alpha.len() != spec.seed_arity() {
        return Err(GeneratorError::SeedArity {
            expected: spec.seed_arity(),
            got: alpha.len(),
        });
    }
    let f = spec.field();
    let n = spec.n();
    let arena: Arc<VarArena> = VarArena::numbered("x", n);
    let mut layers = Vec::with_capacity(n + 1);
    let mut edges = 0;
    for (layer, (&a, &var)) in alpha.iter().zip(&fs.order).enumerate() {
        let entries: Vec<Vec<UniPoly>> = fs
            .edge_labels(f, layer, a)
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|(c, x)| UniPoly::linear(c, x))
                    .collect()
            })
            .collect();
        edges += entries.iter().map(Vec::len).sum::<usize>();
        layers.push(RoAbpLayer {
            var: Some(VarId(var as u32 - 1)),
            entries,
        });
    }
    let sink: Vec<Vec<UniPoly>> = fs
        .sink_labels(f, alpha[n])
        .into_iter()
        .map(|c| vec![UniPoly::constant(c)])
        .collect();
    edges += sink.len();
    layers.push(RoAbpLayer {
        var: None,
        entries: sink,
    });
    Ok(WitnessArtifact {
        generator: spec.descriptor().clone(),
        alpha: alpha.to_vec(),
        body: WitnessBody::RoAbp(RoAbp::new(f, &arena, layers)?),
        declared_size: edges,
    })
}

/// Builds the witness appropriate to the spec kind.
pub fn witness_for(
    spec: &GeneratorSpec,
    alpha: &[FieldElem],
) -> Result<WitnessArtifact, GeneratorError> {
    match spec.fs() {
        Some(_) => witness_fs_roabp(spec, alpha),
        None => witness_circuit(spec, alpha),
    }
}

pub fn witness_verify(
    a: &WitnessArtifact,
    spec: &GeneratorSpec,
    budget: usize,
) -> Result<bool, GeneratorError> {
    if &a.generator != spec.descriptor() {
        return Ok(false);
    }
    let expanded = match &a.body {
        WitnessBody::Circuit(c) => c.expand_budgeted(budget)?,
        WitnessBody::RoAbp(r) => r.expand(budget)?,
    };
    let x_block: Vec<VarId> = expanded.arena().vars().collect();
    if x_block.len() != spec.n() {
        return Ok(false);
    }
    let Ok(coeffs) = expanded.coeff_extract(&x_block) else {
        return Ok(false);
    };
    let Some(coeffs) = coeffs.to_constants() else {
        return Ok(false);
    };
    Ok(coeffs == spec.image(&a.alpha)?)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::circuit::Gate;
    use crate::poly::DEFAULT_TERM_BUDGET;

    fn spec(text: &str) -> GeneratorSpec {
        GeneratorSpec::build(&text.parse().unwrap(), &PrimeField::goldilocks()).unwrap()
    }

    fn random_alpha(g: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<FieldElem> {
        (0..g.seed_arity()).map(|_| g.field().random(rng)).collect()
    }

    fn expand(a: &WitnessArtifact) -> String {
        match &a.body {
            WitnessBody::Circuit(c) => c.expand().unwrap().to_string(),
            WitnessBody::RoAbp(r) => r.expand(DEFAULT_TERM_BUDGET).unwrap().to_string(),
        }
    }

    #[test]
    fn ssv_witness_example() {
        let g = spec("ssv:n=2,k=1");
        let f = g.field();
        let alpha = vec![f.one(), f.one(), f.zero()];
        let a = witness_circuit(&g, &alpha).unwrap();
        assert_eq!(expand(&a), "x1");
        let WitnessBody::Circuit(c) = &a.body else {
            panic!()
        };
        let products = c
            .nodes()
            .iter()
            .filter(|n| matches!(n, Gate::Mul { .. }))
            .count();
        assert_eq!(products, 1);
    }

    #[test]
    fn sssv_witness_without_y_is_the_shift() {
        let g = spec("sssv:n=3,k=2");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut alpha = random_alpha(&g, &mut rng);
        alpha[0] = FieldElem::ZERO;
        alpha[1] = FieldElem::ZERO;
        let a = witness_circuit(&g, &alpha).unwrap();
        let want = crate::poly::SparsePoly::parse(
            g.field(),
            &VarArena::numbered("x", 3),
            "x1*x2*x3 + x1*x2 + x1*x3 + x2*x3 + x1 + x2 + x3 + 1",
        )
        .unwrap();
        assert_eq!(expand(&a), want.to_string());
    }

    #[test]
    fn witnesses_verify_within_declared_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for text in [
            "rc:n=2,r=2",
            "rc:n=3,r=2,vdm=true",
            "ssv:n=3,k=2",
            "sssv:n=2,k=2",
            "trdeg:n=2,k=1",
            "asss:n=2,k=1,D=3,s=4,R=2",
            "bms:n=3,r=1,s=2",
            "fs:n=2,w=2,d=1",
            "fs:n=3,w=1,d=2,order=2-3-1",
        ] {
            let g = spec(text);
            let bound = WitnessArtifact::size_bound(&g).unwrap();
            for _ in 0..5 {
                let a = witness_for(&g, &random_alpha(&g, &mut rng)).unwrap();
                assert!(
                    witness_verify(&a, &g, DEFAULT_TERM_BUDGET).unwrap(),
                    "{text}"
                );
                assert!(
                    a.declared_size <= bound,
                    "{text}: {} > {bound}",
                    a.declared_size
                );
            }
        }
    }

    #[test]
    fn fs_witness_shape() {
        let g = spec("fs:n=1,w=1,d=1");
        let f = g.field();
        let alpha = vec![f.elem(3), f.elem(5)];
        let a = witness_fs_roabp(&g, &alpha).unwrap();
        let omega = g.fs().unwrap().omega;
        let c = f.mul(omega, f.elem(3));
        let WitnessBody::RoAbp(r) = &a.body else {
            panic!()
        };
        assert_eq!(r.width(), 1);
        assert_eq!(r.layers()[0].entries, vec![vec![UniPoly::linear(c, c)]]);
        assert_eq!(
            g.image(&alpha).unwrap().values(),
            vec![c.value(), c.value()]
        );

        let g = spec("fs:n=3,w=2,d=1");
        let zero = vec![FieldElem::ZERO; 4];
        let a = witness_fs_roabp(&g, &zero).unwrap();
        assert!(witness_verify(&a, &g, DEFAULT_TERM_BUDGET).unwrap());
        let WitnessBody::RoAbp(r) = &a.body else {
            panic!()
        };
        assert_eq!(r.width(), 4);
        assert_eq!(r.layers().len(), 4);
        assert!(r.layers()[1..3]
            .iter()
            .all(|l| l.rows() == 4 && l.cols() == 4));
    }

    #[test]
    fn tampering_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = spec("sssv:n=2,k=1");
        let a = witness_circuit(&g, &random_alpha(&g, &mut rng)).unwrap();
        let WitnessBody::Circuit(c) = &a.body else {
            panic!()
        };
        let (id, gate) = c
            .nodes()
            .iter()
            .enumerate()
            .find_map(|(i, n)| match n {
                Gate::Add {
                    children,
                    weights,
                    constant,
                } if children.len() == 1 => Some((
                    i,
                    Gate::Add {
                        children: children.clone(),
                        weights: weights.clone(),
                        constant: g.field().add(*constant, FieldElem::ONE),
                    },
                )),
                _ => None,
            })
            .unwrap();
        let bad = WitnessArtifact {
            body: WitnessBody::Circuit(c.with_gate(id, gate).unwrap()),
            ..a.clone()
        };
        assert!(!witness_verify(&bad, &g, DEFAULT_TERM_BUDGET).unwrap());

        let g = spec("fs:n=2,w=2,d=1");
        let a = witness_fs_roabp(&g, &random_alpha(&g, &mut rng)).unwrap();
        let WitnessBody::RoAbp(r) = &a.body else {
            panic!()
        };
        let mut layers = r.layers().to_vec();
        let e = &mut layers[1].entries[2][3];
        *e = UniPoly::linear(
            g.field()
                .add(e.eval(g.field(), FieldElem::ZERO), FieldElem::ONE),
            e.coeffs()[1],
        );
        let tampered = RoAbp::new(g.field(), r.arena(), layers).unwrap();
        let bad = WitnessArtifact {
            body: WitnessBody::RoAbp(tampered),
            ..a.clone()
        };
        assert!(!witness_verify(&bad, &g, DEFAULT_TERM_BUDGET).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let field = PrimeField::goldilocks();
        for text in ["bms:n=2,r=1,s=2", "fs:n=2,w=2,d=2"] {
            let g = spec(text);
            let a = witness_for(&g, &random_alpha(&g, &mut rng)).unwrap();
            let back = WitnessArtifact::from_json(&field, &a.to_json_value().to_string()).unwrap();
            assert_eq!(back, a);
            assert!(back.verify(&field, DEFAULT_TERM_BUDGET).unwrap());
        }
        assert!(WitnessArtifact::from_json(&field, "{}").is_err());
    }
}
