use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use super::HarnessError;
use crate::field::{FieldElem, PrimeField};
use crate::poly::{Monomial, SparsePoly};

const JACOBIAN_EVALUATIONS: usize = 5;
const MAX_CONCENTRATION_VARS: usize = 12;

/// Rank over `F_p` by Gaussian elimination.
pub fn rank_mod_p(f: &PrimeField, mut rows: Vec<Vec<FieldElem>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = f.inv(rows[rank][col]).expect("pivot is nonzero");
        let pivot_row: Vec<FieldElem> = rows[rank].iter().map(|&v| f.mul(v, inv)).collect();
        for row in rows.iter_mut().skip(rank + 1) {
            let c = row[col];
            if c.is_zero() {
                continue;
            }
            for (x, &p) in row.iter_mut().zip(&pivot_row) {
                *x = f.sub(*x, f.mul(c, p));
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// `∂F_i / ∂X_j` over the arena of the first polynomial.
pub fn jacobian(fs: &[SparsePoly]) -> Vec<Vec<SparsePoly>> {
    let Some(first) = fs.first() else {
        return Vec::new();
    };
    let vars: Vec<_> = first.arena().vars().collect();
    fs.iter()
        .map(|p| vars.iter().map(|&v| p.derivative(v)).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JacobianRank {
    pub rank: usize,
    pub evaluations: usize,
    pub max_degree: u64,
    /// `p ≥ d^rank`, under which the rank equals the transcendence degree.
    pub characteristic_ok: bool,
    /// Bound on the chance that the true rank exceeds `rank`; `None` when exact.
    pub failure_bound_log2: Option<f64>,
}

/// Max rank of the Jacobian over random evaluation points.
pub fn jacobian_rank<R: Rng + ?Sized>(
    fs: &[SparsePoly],
    rng: &mut R,
) -> Result<JacobianRank, HarnessError> {
    let Some(first) = fs.first() else {
        return Ok(JacobianRank {
            rank: 0,
            evaluations: 0,
            max_degree: 0,
            characteristic_ok: true,
            failure_bound_log2: None,
        });
    };
    let f = first.field();
    let arena = first.arena();
    if fs.iter().any(|p| p.arena() != arena) {
        return Err(HarnessError::Parameters(
            "all polynomials must share one arena".into(),
        ));
    }
    let jac = jacobian(fs);
    let mut rank = 0;
    for _ in 0..JACOBIAN_EVALUATIONS {
        let point: Vec<FieldElem> = (0..arena.len()).map(|_| f.random(rng)).collect();
        let rows = jac
            .iter()
            .map(|row| row.iter().map(|e| e.eval(&point)).collect())
            .collect::<Result<Vec<_>, _>>()?;
        rank = rank.max(rank_mod_p(f, rows));
    }
    let max_degree = fs
        .iter()
        .filter_map(SparsePoly::total_degree)
        .max()
        .unwrap_or(0) as u64;
    let characteristic_ok = (max_degree as u128)
        .checked_pow(rank as u32)
        .is_some_and(|bound| f.modulus() as u128 >= bound);
    // a nonvanishing (rank+1)-minor has degree at most (rank+1)(d-1)
    let minor_degree = (rank as u64 + 1) * max_degree.saturating_sub(1);
    Ok(JacobianRank {
        rank,
        evaluations: JACOBIAN_EVALUATIONS,
        max_degree,
        characteristic_ok,
        failure_bound_log2: Some(super::schwartz_zippel_log2(
            minor_degree,
            f.modulus(),
            JACOBIAN_EVALUATIONS,
        )),
    })
}

/// Support-`k` rank concentration of `mat` at `point`: the Hasse derivatives
/// `∂_m mat (point)` with `|supp m| ≤ k` span the same space as all of them.
/// `∂_m mat (point)` is the coefficient of `X^m` in `mat(X + point)`.
pub fn rank_concentration_check(
    mat: &[Vec<SparsePoly>],
    point: &[FieldElem],
    k: usize,
) -> Result<bool, HarnessError> {
    let entries: Vec<&SparsePoly> = mat.iter().flatten().collect();
    let Some(first) = entries.first() else {
        return Ok(true);
    };
    if first.arena().len() > MAX_CONCENTRATION_VARS {
        return Err(HarnessError::Parameters(format!(
            "rank concentration enumerates derivatives of at most {MAX_CONCENTRATION_VARS} variables"
        )));
    }
    let f = first.field();
    let shifted = entries
        .iter()
        .map(|p| p.shift_by(point))
        .collect::<Result<Vec<_>, _>>()?;
    let monomials: BTreeSet<Monomial> = shifted
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()))
        .collect();
    let vector = |m: &Monomial| shifted.iter().map(|p| p.coefficient(m)).collect::<Vec<_>>();
    let all: Vec<Vec<FieldElem>> = monomials.iter().map(vector).collect();
    let low: Vec<Vec<FieldElem>> = monomials
        .iter()
        .filter(|m| m.support_size() <= k)
        .map(vector)
        .collect();
    Ok(rank_mod_p(f, low) == rank_mod_p(f, all))
}
