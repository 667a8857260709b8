//! Canonical text form: terms in descending graded-lex order, joined by
//! ` + ` / ` - `, each term `coeff*var^e*...` with unit coefficients and unit
//! exponents omitted. Coefficients above `p/2` print as negatives.

use std::fmt;
use std::sync::Arc;

use super::{Monomial, PolyError, SparsePoly, VarArena};
use crate::field::PrimeField;

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().rev().enumerate() {
            let (negative, magnitude) = self.field().signed_repr(c);
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut parts: Vec<String> = Vec::new();
            if magnitude != 1 || m.is_one() {
                parts.push(magnitude.to_string());
            }
            for &(v, e) in m.exponents() {
                let name = self.arena().name(v);
                parts.push(if e == 1 {
                    name.to_string()
                } else {
                    format!("{name}^{e}")
                });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl SparsePoly {
    /// Parses the canonical text form (any term order, optional whitespace).
    pub fn parse(
        field: &PrimeField,
        arena: &Arc<VarArena>,
        text: &str,
    ) -> Result<SparsePoly, PolyError> {
        let mut out = SparsePoly::zero(field, arena);
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(PolyError::Parse("empty input".into()));
        }
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut current = String::new();
        let mut negative = false;
        for (i, ch) in cleaned.chars().enumerate() {
            if (ch == '+' || ch == '-') && !current.ends_with('^') {
                if i > 0 {
                    if current.is_empty() {
                        return Err(PolyError::Parse(format!("dangling sign in `{text}`")));
                    }
                    terms.push((negative, std::mem::take(&mut current)));
                }
                negative = ch == '-';
            } else {
                current.push(ch);
            }
        }
        if current.is_empty() {
            return Err(PolyError::Parse(format!("trailing sign in `{text}`")));
        }
        terms.push((negative, current));
        for (negative, term) in terms {
            let mut coeff = field.one();
            let mut pairs = Vec::new();
            for factor in term.split('*') {
                if factor.is_empty() {
                    return Err(PolyError::Parse(format!("empty factor in `{term}`")));
                }
                if factor.chars().all(|c| c.is_ascii_digit()) {
                    let value: u128 = factor
                        .parse()
                        .map_err(|e| PolyError::Parse(format!("{e}")))?;
                    coeff = field.mul(coeff, field.elem((value % field.modulus() as u128) as u64));
                    continue;
                }
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => (
                        n,
                        e.parse::<u32>()
                            .map_err(|e| PolyError::Parse(format!("bad exponent: {e}")))?,
                    ),
                    None => (factor, 1),
                };
                let id = arena
                    .lookup(name)
                    .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
                pairs.push((id, exp));
            }
            if negative {
                coeff = field.neg(coeff);
            }
            out.add_term(Monomial::from_pairs(pairs), coeff);
        }
        Ok(out)
    }
}
