use serde::{Deserialize, Serialize};

use super::{Monomial, PolyError, SparsePoly, VarId};
use crate::field::FieldElem;

/// Largest x-block for which dense coefficient vectors are built.
pub const MAX_DENSE_BLOCK: usize = 24;

/// 1-based position of the subset `S ⊆ [n]` (elements 1-based) under
/// `i - 1 = Σ_{k∈S} 2^{k-1}`.
pub fn subset_index(subset: &[usize]) -> usize {
    1 + subset.iter().fold(0usize, |acc, &k| acc | (1 << (k - 1)))
}

/// Inverse of [`subset_index`]: the sorted 1-based subset at index `i`.
pub fn subset_from_index(i: usize, n: usize) -> Vec<usize> {
    let bits = i - 1;
    (1..=n).filter(|&k| bits >> (k - 1) & 1 == 1).collect()
}

/// The length-`2^n` coefficient vector of a multilinear polynomial, indexed by
/// subsets of the x-block. Entry `mask` (0-based) holds the coefficient of
/// `Π_{k: bit k-1 of mask} x_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoeffVector<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T> CoeffVector<T> {
    pub fn new(n: usize, entries: Vec<T>) -> Self {
        assert_eq!(
            entries.len(),
            1 << n,
            "coefficient vector length must be 2^n"
        );
        CoeffVector { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    /// Entry at the 1-based coordinate `i ∈ [N]`.
    pub fn at(&self, i: usize) -> &T {
        &self.entries[i - 1]
    }

    pub fn at_subset(&self, subset: &[usize]) -> &T {
        self.at(subset_index(subset))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> CoeffVector<U> {
        CoeffVector {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }
}

impl CoeffVector<FieldElem> {
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn values(&self) -> Vec<u64> {
        self.entries.iter().map(|c| c.value()).collect()
    }
}

impl CoeffVector<SparsePoly> {
    /// Converts to field elements when every entry is constant.
    pub fn to_constants(&self) -> Option<CoeffVector<FieldElem>> {
        let entries = self
            .entries
            .iter()
            .map(SparsePoly::as_constant)
            .collect::<Option<Vec<_>>>()?;
        Some(CoeffVector { n: self.n, entries })
    }

    /// `Σ_S entry_S · Π_{k∈S} x_k`, the inverse of `coeff_extract`.
    pub fn reassemble(&self, x_block: &[VarId]) -> Result<SparsePoly, PolyError> {
        if x_block.len() != self.n {
            return Err(PolyError::ArityMismatch {
                expected: self.n,
                got: x_block.len(),
            });
        }
        let first = self.entries.first().expect("nonempty vector");
        let mut out = SparsePoly::zero(first.field(), first.arena());
        for (mask, entry) in self.entries.iter().enumerate() {
            let x_mono = Monomial::from_pairs(
                (0..self.n)
                    .filter(|k| mask >> k & 1 == 1)
                    .map(|k| (x_block[k], 1)),
            );
            for (m, c) in entry.terms() {
                out.add_term(m.mul(&x_mono), c);
            }
        }
        Ok(out)
    }
}

impl SparsePoly {
    /// The coefficient vector in the x-block, with entries polynomials in the
    /// remaining variables (same arena).
    pub fn coeff_extract(&self, x_block: &[VarId]) -> Result<CoeffVector<SparsePoly>, PolyError> {
        let n = x_block.len();
        if n > MAX_DENSE_BLOCK {
            return Err(PolyError::BlockTooLarge(n));
        }
        let position = |v: VarId| x_block.iter().position(|&u| u == v);
        let mut entries = vec![SparsePoly::zero(self.field(), self.arena()); 1 << n];
        for (m, c) in self.terms() {
            let (inside, outside) = m.split(|v| position(v).is_some());
            let mut mask = 0usize;
            for &(v, e) in inside.exponents() {
                if e > 1 {
                    return Err(PolyError::NotMultilinear(self.arena().name(v).to_string()));
                }
                mask |= 1 << position(v).expect("in block");
            }
            entries[mask].add_term(outside, c);
        }
        Ok(CoeffVector { n, entries })
    }
}
