use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Monomial, SparsePoly, VarArena, VarId};
use crate::field::{FieldElem, FieldError, PrimeField};

/// Dense univariate polynomial, lowest degree first, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UniPoly {
    coeffs: Vec<FieldElem>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn constant(c: FieldElem) -> Self {
        Self::new(vec![c])
    }

    /// `a + b·X`.
    pub fn linear(a: FieldElem, b: FieldElem) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, field: &PrimeField, x: FieldElem) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElem::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
    }

    pub fn mul(&self, field: &PrimeField, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::default();
        }
        let mut out = vec![FieldElem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.add(out[i + j], field.mul(a, b));
            }
        }
        UniPoly::new(out)
    }

    pub fn scale(&self, field: &PrimeField, c: FieldElem) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    /// Lagrange basis for distinct `points`: `basis[i](points[j]) = δ_ij`.
    pub fn lagrange_basis(
        field: &PrimeField,
        points: &[FieldElem],
    ) -> Result<Vec<UniPoly>, FieldError> {
        let mut basis = Vec::with_capacity(points.len());
        for (i, &bi) in points.iter().enumerate() {
            let mut num = UniPoly::constant(FieldElem::ONE);
            let mut denom = FieldElem::ONE;
            for (j, &bj) in points.iter().enumerate() {
                if i == j {
                    continue;
                }
                num = num.mul(field, &UniPoly::linear(field.neg(bj), FieldElem::ONE));
                denom = field.mul(denom, field.sub(bi, bj));
            }
            basis.push(num.scale(field, field.inv(denom)?));
        }
        Ok(basis)
    }

    /// This polynomial in the variable `v`.
    pub fn to_sparse(&self, field: &PrimeField, arena: &Arc<VarArena>, v: VarId) -> SparsePoly {
        self.compose_monomial(field, arena, v, FieldElem::ONE, 1)
    }

    /// `p((c·v)^e)` as a sparse polynomial, i.e. `Σ a_k c^{ek} v^{ek}`.
    pub fn compose_monomial(
        &self,
        field: &PrimeField,
        arena: &Arc<VarArena>,
        v: VarId,
        c: FieldElem,
        e: u32,
    ) -> SparsePoly {
        let ce = field.pow(c, e as u64);
        let mut scale = FieldElem::ONE;
        SparsePoly::from_terms(
            field,
            arena,
            self.coeffs.iter().enumerate().map(|(k, &a)| {
                let term = (Monomial::power(v, e * k as u32), field.mul(a, scale));
                scale = field.mul(scale, ce);
                term
            }),
        )
    }

    /// Substitutes a polynomial for the variable by Horner's rule.
    pub fn compose(
        &self,
        inner: &SparsePoly,
        budget: usize,
    ) -> Result<SparsePoly, super::PolyError> {
        let mut acc = SparsePoly::zero(inner.field(), inner.arena());
        for &c in self.coeffs.iter().rev() {
            acc = acc.mul_budgeted(inner, budget)?;
            acc.add_term(Monomial::one(), c);
        }
        Ok(acc)
    }
}
