use std::sync::Arc;

use itertools::Itertools;

use super::GeneratorError;
use crate::field::{FieldElem, PrimeField};
use crate::poly::{Monomial, PolyError, SparsePoly, UniPoly, VarArena, VarId};

/// Parameters of the FS generator: `ω`, the nodes `β_j = j` and their
/// Lagrange basis. Layer `i` (1-based) reads `x_{order[i-1]}` and seed `y_i`;
/// `y_{n+1}` feeds the sink.
#[derive(Clone, Debug)]
pub struct FsData {
    pub w2: usize,
    pub omega: FieldElem,
    pub omega_order: u64,
    pub betas: Vec<FieldElem>,
    pub basis: Vec<UniPoly>,
    pub order: Vec<usize>,
    /// `E_i = 2^{i-1} d w²`.
    pub exponents: Vec<u64>,
}

impl FsData {
    pub fn new(
        field: &PrimeField,
        n: usize,
        w: usize,
        d: usize,
        order: Vec<usize>,
    ) -> Result<Self, GeneratorError> {
        let overflow =
            || GeneratorError::Parameters("FS parameters overflow 64-bit exponents".into());
        let w2 = w.checked_mul(w).ok_or_else(overflow)?;
        if field.modulus() <= w2 as u64 {
            return Err(GeneratorError::Parameters(format!(
                "need p > w² = {w2} distinct nodes"
            )));
        }
        let side = ((1u128 << n) * d as u128)
            .checked_mul(w2 as u128)
            .ok_or_else(overflow)?;
        let (omega, omega_order) =
            field.element_of_order(side.checked_mul(side).ok_or_else(overflow)?)?;
        let betas: Vec<FieldElem> = (1..=w2 as u64).map(|j| field.elem(j)).collect();
        let basis = UniPoly::lagrange_basis(field, &betas)?;
        let exponents = (0..n)
            .map(|i| {
                1u64.checked_shl(i as u32)
                    .and_then(|p| p.checked_mul((d * w2) as u64))
                    .ok_or_else(overflow)
            })
            .collect::<Result<_, _>>()?;
        Ok(FsData {
            w2,
            omega,
            omega_order,
            betas,
            basis,
            order,
            exponents,
        })
    }

    /// `(u, u^{E_i})` with `u = ω^ℓ α_i`, for every target label `ℓ`.
    fn targets(
        &self,
        f: &PrimeField,
        layer: usize,
        alpha: FieldElem,
    ) -> Vec<(FieldElem, FieldElem)> {
        (1..=self.w2 as u64)
            .map(|l| {
                let u = f.mul(f.pow(self.omega, l), alpha);
                (u, f.pow(u, self.exponents[layer]))
            })
            .collect()
    }

    /// Edge labels `(constant, x-coefficient)` of layer `layer` (0-based);
    /// `from = None` is the source, for which `p_{ℓ_0}(t) = t`.
    pub fn edge_labels(
        &self,
        f: &PrimeField,
        layer: usize,
        alpha: FieldElem,
    ) -> Vec<Vec<(FieldElem, FieldElem)>> {
        let targets = self.targets(f, layer, alpha);
        if layer == 0 {
            return vec![targets];
        }
        self.basis
            .iter()
            .map(|p| {
                targets
                    .iter()
                    .map(|&(u, ue)| (p.eval(f, u), p.eval(f, ue)))
                    .collect()
            })
            .collect()
    }

    pub fn sink_labels(&self, f: &PrimeField, alpha: FieldElem) -> Vec<FieldElem> {
        self.basis.iter().map(|p| p.eval(f, alpha)).collect()
    }

    /// Numeric coefficient vector by a dynamic program over the layers.
    pub fn image(&self, f: &PrimeField, n: usize, alpha: &[FieldElem]) -> Vec<FieldElem> {
        let size = 1usize << n;
        let mut state = vec![vec![FieldElem::ZERO; size]];
        state[0][0] = FieldElem::ONE;
        let mut seen = 0usize;
        for (layer, &a) in alpha.iter().enumerate().take(n) {
            let bit = 1usize << (self.order[layer] - 1);
            let labels = self.edge_labels(f, layer, a);
            let mut next = vec![vec![FieldElem::ZERO; size]; self.w2];
            for (from, row) in labels.iter().enumerate() {
                let src = &state[from];
                for (to, &(a, b)) in row.iter().enumerate() {
                    let dst = &mut next[to];
                    for mask in submasks(seen) {
                        let v = src[mask];
                        if v.is_zero() {
                            continue;
                        }
                        dst[mask] = f.add(dst[mask], f.mul(v, a));
                        dst[mask | bit] = f.add(dst[mask | bit], f.mul(v, b));
                    }
                }
            }
            seen |= bit;
            state = next;
        }
        let sink = self.sink_labels(f, alpha[n]);
        let mut out = vec![FieldElem::ZERO; size];
        for (row, &c) in state.iter().zip(&sink) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o = f.add(*o, f.mul(v, c));
            }
        }
        out
    }

    /// `P^FS(x, y)` expanded layer by layer over the spec arena.
    pub fn witness_polynomial(
        &self,
        f: &PrimeField,
        arena: &Arc<VarArena>,
        n: usize,
        budget: usize,
    ) -> Result<SparsePoly, GeneratorError> {
        let too_big =
            || GeneratorError::Parameters("FS exponents exceed the symbolic range".into());
        let x = |layer: usize| VarId(self.order[layer] as u32 - 1);
        let y = |i: usize| VarId((n + i) as u32);
        let top_degree = self.basis.first().map_or(0, UniPoly::degree).max(1) as u64;
        let mut state = vec![SparsePoly::one(f, arena)];
        for layer in 0..n {
            let e = self.exponents[layer];
            if e.checked_mul(top_degree)
                .is_none_or(|t| t > u32::MAX as u64)
            {
                return Err(too_big());
            }
            let e = e as u32;
            let mut next = vec![SparsePoly::zero(f, arena); self.w2];
            for (to, slot) in next.iter_mut().enumerate() {
                let c = f.pow(self.omega, to as u64 + 1);
                for (from, src) in state.iter().enumerate() {
                    let (a, b) = if layer == 0 {
                        let a = SparsePoly::monomial(f, arena, Monomial::var(y(0)), c);
                        let b = SparsePoly::monomial(
                            f,
                            arena,
                            Monomial::power(y(0), e),
                            f.pow(c, e as u64),
                        );
                        (a, b)
                    } else {
                        let p = &self.basis[from];
                        (
                            p.compose_monomial(f, arena, y(layer), c, 1),
                            p.compose_monomial(f, arena, y(layer), c, e),
                        )
                    };
                    let mut label = a;
                    label.add_assign_unchecked(
                        &b.mul_budgeted(&SparsePoly::var(f, arena, x(layer)), budget)?,
                    );
                    slot.add_assign_unchecked(&src.mul_budgeted(&label, budget)?);
                    if slot.sparsity() > budget {
                        return Err(PolyError::ExpansionTooLarge { budget }.into());
                    }
                }
            }
            state = next;
        }
        let mut out = SparsePoly::zero(f, arena);
        for (src, p) in state.iter().zip(&self.basis) {
            out.add_assign_unchecked(&src.mul_budgeted(&p.to_sparse(f, arena, y(n)), budget)?);
        }
        Ok(out)
    }

    pub fn seed_degree_bound(&self) -> u64 {
        let top = self.basis.first().map_or(0, UniPoly::degree) as u64;
        let layers: u64 = self
            .exponents
            .iter()
            .enumerate()
            .map(|(i, &e)| if i == 0 { e } else { e * top.max(1) })
            .sum();
        layers + top
    }
}

fn submasks(mask: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            Some((cur - 1) & mask)
        };
        Some(cur)
    })
}

/// Coordinates `1..=N` in the order read by roABPs that the FS variant with
/// layer order `sigma` hits: `S` sorts by `Σ_{i: sigma_i ∈ S} 2^{i-1}`.
pub fn monomial_compatible_order(sigma: &[usize]) -> Vec<usize> {
    let n = sigma.len();
    let key = |mask: usize| {
        (0..n)
            .filter(|&i| mask >> (sigma[i] - 1) & 1 == 1)
            .map(|i| 1usize << i)
            .sum::<usize>()
    };
    let mut coords: Vec<usize> = (0..1usize << n).collect();
    coords.sort_by_key(|&m| key(m));
    coords.into_iter().map(|m| m + 1).collect()
}

/// One order per permutation of `[n]`.
pub fn all_monomial_compatible_orders(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    (1..=n)
        .permutations(n)
        .map(|sigma| {
            let order = monomial_compatible_order(&sigma);
            (sigma, order)
        })
        .collect()
}
