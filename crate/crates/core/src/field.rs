//! Prime-field arithmetic over `F_p` with `p < 2^64`.
//!
//! The field carries the factorization of `p - 1` so elements of a prescribed
//! multiplicative order can be produced constructively.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `2^64 - 2^32 + 1`.
pub const GOLDILOCKS_PRIME: u64 = 0xFFFF_FFFF_0000_0001;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("supplied factorization does not multiply to p-1 = {expected}")]
    BadFactorization { expected: u64 },
    #[error("factor {0} of p-1 is not prime")]
    CompositeFactor(u64),
    #[error("{0} does not generate the multiplicative group")]
    NotAGenerator(u64),
    #[error(
        "no divisor of p-1 = {p_minus_one} is >= {requested}; use a larger field (--field-prime/--field-factors)"
    )]
    OrderUnavailable { requested: u128, p_minus_one: u64 },
    #[error("cannot draw {count} distinct elements from a field of size {modulus}")]
    TooManyPoints { count: u64, modulus: u64 },
}

/// A canonical residue in `[0, p)`.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct FieldElem(u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, PartialEq, Eq)]
struct FieldData {
    modulus: u64,
    generator: u64,
    factors: Vec<(u64, u32)>,
}

/// The field `F_p` together with a generator of `F_p^*` and the factorization
/// of `p - 1`. Cloning is cheap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField(Arc<FieldData>);

impl PrimeField {
    /// The default field `p = 2^64 - 2^32 + 1`, generator 7.
    pub fn goldilocks() -> Self {
        let factors = vec![(2, 32), (3, 1), (5, 1), (17, 1), (257, 1), (65537, 1)];
        Self::with_generator(GOLDILOCKS_PRIME, &factors, 7)
            .expect("goldilocks parameters are valid")
    }

    /// Builds `F_p` from the prime-power factorization of `p - 1`, choosing the
    /// smallest generator.
    pub fn new(modulus: u64, factors: &[(u64, u32)]) -> Result<Self, FieldError> {
        Self::check(modulus, factors)?;
        let generator = (1..modulus)
            .find(|&g| is_generator(modulus, g, factors))
            .expect("a prime field always has a generator");
        Ok(Self::from_parts(modulus, generator, factors))
    }

    pub fn with_generator(
        modulus: u64,
        factors: &[(u64, u32)],
        generator: u64,
    ) -> Result<Self, FieldError> {
        Self::check(modulus, factors)?;
        if generator == 0 || generator >= modulus || !is_generator(modulus, generator, factors) {
            return Err(FieldError::NotAGenerator(generator));
        }
        Ok(Self::from_parts(modulus, generator, factors))
    }

    /// Small prime with the factorization of `p - 1` computed by trial division.
    pub fn small(modulus: u64) -> Result<Self, FieldError> {
        if !is_prime(modulus) {
            return Err(FieldError::NotPrime(modulus));
        }
        Self::new(modulus, &factorize(modulus - 1))
    }

    fn check(modulus: u64, factors: &[(u64, u32)]) -> Result<(), FieldError> {
        if !is_prime(modulus) {
            return Err(FieldError::NotPrime(modulus));
        }
        let mut product: u128 = 1;
        for &(q, e) in factors {
            if !is_prime(q) {
                return Err(FieldError::CompositeFactor(q));
            }
            for _ in 0..e {
                product *= q as u128;
                if product > u64::MAX as u128 {
                    return Err(FieldError::BadFactorization {
                        expected: modulus - 1,
                    });
                }
            }
        }
        if product != (modulus - 1) as u128 {
            return Err(FieldError::BadFactorization {
                expected: modulus - 1,
            });
        }
        Ok(())
    }

    fn from_parts(modulus: u64, generator: u64, factors: &[(u64, u32)]) -> Self {
        let mut factors = factors.to_vec();
        factors.sort_unstable();
        PrimeField(Arc::new(FieldData {
            modulus,
            generator,
            factors,
        }))
    }

    pub fn modulus(&self) -> u64 {
        self.0.modulus
    }

    pub fn generator(&self) -> FieldElem {
        FieldElem(self.0.generator)
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.0.factors
    }

    /// Parses `"2^32,3,5"` style factor lists.
    pub fn parse_factors(text: &str) -> Result<Vec<(u64, u32)>, String> {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|item| {
                let item = item.trim();
                let (base, exp) = match item.split_once('^') {
                    Some((b, e)) => (b, e),
                    None => (item, "1"),
                };
                let base = base
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| format!("bad factor `{item}`: {e}"))?;
                let exp = exp
                    .trim()
                    .parse::<u32>()
                    .map_err(|e| format!("bad exponent `{item}`: {e}"))?;
                Ok((base, exp))
            })
            .collect()
    }

    pub fn factors_string(&self) -> String {
        self.0
            .factors
            .iter()
            .map(|&(q, e)| {
                if e == 1 {
                    q.to_string()
                } else {
                    format!("{q}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn elem(&self, v: u64) -> FieldElem {
        FieldElem(v % self.0.modulus)
    }

    pub fn from_i64(&self, v: i64) -> FieldElem {
        let p = self.0.modulus as i128;
        FieldElem(((v as i128).rem_euclid(p)) as u64)
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    pub fn one(&self) -> FieldElem {
        // p >= 2 so 1 is always reduced
        FieldElem::ONE
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let p = self.0.modulus;
        let (s, carry) = a.0.overflowing_add(b.0);
        if carry || s >= p {
            FieldElem(s.wrapping_sub(p))
        } else {
            FieldElem(s)
        }
    }

    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 >= b.0 {
            FieldElem(a.0 - b.0)
        } else {
            FieldElem(self.0.modulus - (b.0 - a.0))
        }
    }

    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if a.0 == 0 {
            a
        } else {
            FieldElem(self.0.modulus - a.0)
        }
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(((a.0 as u128 * b.0 as u128) % self.0.modulus as u128) as u64)
    }

    /// `a^e`. For nonzero `a` the exponent is reduced mod `p - 1`; `0^0 = 1`.
    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if a.0 == 0 {
            return if e == 0 {
                FieldElem::ONE
            } else {
                FieldElem::ZERO
            };
        }
        FieldElem(mod_pow(a.0, e % (self.0.modulus - 1), self.0.modulus))
    }

    /// `a^e` with a 128-bit exponent, reduced the same way as [`pow`](Self::pow).
    pub fn pow_u128(&self, a: FieldElem, e: u128) -> FieldElem {
        if a.0 == 0 {
            return if e == 0 {
                FieldElem::ONE
            } else {
                FieldElem::ZERO
            };
        }
        let reduced = (e % (self.0.modulus - 1) as u128) as u64;
        FieldElem(mod_pow(a.0, reduced, self.0.modulus))
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.pow(a, self.0.modulus - 2))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Exact multiplicative order of a nonzero element.
    pub fn order(&self, a: FieldElem) -> Option<u64> {
        if a.0 == 0 {
            return None;
        }
        let mut order = self.0.modulus - 1;
        for &(q, e) in &self.0.factors {
            for _ in 0..e {
                if order.is_multiple_of(q) && self.pow(a, order / q) == FieldElem::ONE {
                    order /= q;
                } else {
                    break;
                }
            }
        }
        Some(order)
    }

    /// All divisors of `p - 1`, sorted ascending.
    pub fn group_order_divisors(&self) -> Vec<u64> {
        let mut divisors = vec![1u64];
        for &(q, e) in &self.0.factors {
            let current = divisors.clone();
            let mut power = 1u64;
            for _ in 0..e {
                power *= q;
                divisors.extend(current.iter().map(|d| d * power));
            }
        }
        divisors.sort_unstable();
        divisors
    }

    /// Returns `g^((p-1)/m)` for the smallest divisor `m` of `p - 1` with
    /// `m >= m_min`; the result has multiplicative order exactly `m`.
    pub fn element_of_order(&self, m_min: u128) -> Result<(FieldElem, u64), FieldError> {
        let p_minus_one = self.0.modulus - 1;
        let m = self
            .group_order_divisors()
            .into_iter()
            .find(|&d| d as u128 >= m_min)
            .ok_or(FieldError::OrderUnavailable {
                requested: m_min,
                p_minus_one,
            })?;
        Ok((self.pow(self.generator(), p_minus_one / m), m))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(0..self.0.modulus))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.gen_range(1..self.0.modulus))
    }

    /// `count` pairwise distinct elements, deterministic in the RNG state.
    pub fn sample_points<R: Rng + ?Sized>(
        &self,
        count: u64,
        rng: &mut R,
    ) -> Result<Vec<FieldElem>, FieldError> {
        let p = self.0.modulus;
        if count > p {
            return Err(FieldError::TooManyPoints { count, modulus: p });
        }
        // dense partial Fisher-Yates when the request is a large fraction of a small field
        if p <= 1 << 20 && count.saturating_mul(4) >= p {
            let mut all: Vec<u64> = (0..p).collect();
            for i in 0..count as usize {
                let j = rng.gen_range(i..all.len());
                all.swap(i, j);
            }
            return Ok(all[..count as usize]
                .iter()
                .map(|&v| FieldElem(v))
                .collect());
        }
        let mut seen = HashSet::with_capacity(count as usize);
        let mut out = Vec::with_capacity(count as usize);
        while (out.len() as u64) < count {
            let v = rng.gen_range(0..p);
            if seen.insert(v) {
                out.push(FieldElem(v));
            }
        }
        Ok(out)
    }

    /// Prints residues above `p/2` as negatives.
    pub fn signed_repr(&self, a: FieldElem) -> (bool, u64) {
        let p = self.0.modulus;
        if a.0 > p / 2 {
            (true, p - a.0)
        } else {
            (false, a.0)
        }
    }
}

fn is_generator(p: u64, g: u64, factors: &[(u64, u32)]) -> bool {
    let g = g % p;
    g != 0
        && factors
            .iter()
            .all(|&(q, _)| mod_pow(g, (p - 1) / q, p) != 1)
}

pub(crate) fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut acc: u128 = 1;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Trial-division factorization; only meant for small moduli.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut q = 2u64;
    while q.saturating_mul(q) <= n {
        if n.is_multiple_of(q) {
            let mut e = 0;
            while n.is_multiple_of(q) {
                n /= q;
                e += 1;
            }
            out.push((q, e));
        }
        q += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}
