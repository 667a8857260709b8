//! Succinct generators. A spec holds a witness polynomial `P(x, seeds)`; the
//! generator is the map `seeds ↦ coeff_x(P)` into `F^N`, `N = 2^n`.
//!
//! Every kind except FS is a sum of products
//! `Σ_j c_j(seeds) · Π_k (a_jk(seeds) + b_jk(seeds) · x_k)`, which is also the
//! shape of its witness circuit. FS is kept in layered matrix-product form.

mod fs;
#[cfg(test)]
mod tests;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError};
use crate::field::{FieldElem, FieldError, PrimeField};
use crate::params::{ceil_log2, join_list, Params};
use crate::poly::{CoeffVector, Monomial, PolyError, SparsePoly, VarArena, VarId, MAX_DENSE_BLOCK};

pub use fs::{all_monomial_compatible_orders, monomial_compatible_order, FsData};

pub const SPEC_JSON_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("{0}")]
    Parameters(String),
    #[error("R = {r} cannot be materialized; pass an override such as R=2")]
    RequiresOverride { r: String },
    #[error("expected {expected} seed values, got {got}")]
    SeedArity { expected: usize, got: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorDescriptor {
    /// `vdm` applies the substitution `t_0 ← t, t_k ← t^{2^{k-1}}`.
    Rc {
        n: usize,
        r: usize,
        vdm: bool,
    },
    Ssv {
        n: usize,
        k: usize,
    },
    Sssv {
        n: usize,
        k: usize,
    },
    Trdeg {
        n: usize,
        k: usize,
        vdm: bool,
    },
    Asss {
        n: usize,
        k: usize,
        depth: usize,
        s: u64,
        r_override: Option<u64>,
    },
    Bms {
        n: usize,
        r: usize,
        s: u64,
    },
    /// `order` is a permutation of `1..=n`; layer `i` reads `x_{order[i]}`.
    Fs {
        n: usize,
        w: usize,
        d: usize,
        order: Option<Vec<usize>>,
    },
}

impl GeneratorDescriptor {
    pub const KINDS: &'static [&'static str] = &["rc", "ssv", "sssv", "trdeg", "asss", "bms", "fs"];

    pub fn n(&self) -> usize {
        match *self {
            Self::Rc { n, .. }
            | Self::Ssv { n, .. }
            | Self::Sssv { n, .. }
            | Self::Trdeg { n, .. }
            | Self::Asss { n, .. }
            | Self::Bms { n, .. }
            | Self::Fs { n, .. } => n,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Rc { .. } => "rc",
            Self::Ssv { .. } => "ssv",
            Self::Sssv { .. } => "sssv",
            Self::Trdeg { .. } => "trdeg",
            Self::Asss { .. } => "asss",
            Self::Bms { .. } => "bms",
            Self::Fs { .. } => "fs",
        }
    }

    fn check(&self) -> Result<(), String> {
        let n = self.n();
        if n == 0 || n > MAX_DENSE_BLOCK {
            return Err(format!("`n` must be in 1..={MAX_DENSE_BLOCK}"));
        }
        let positive = |name: &str, v: u64| {
            if v == 0 {
                Err(format!("`{name}` must be >= 1"))
            } else {
                Ok(())
            }
        };
        match self {
            Self::Rc { .. } => Ok(()),
            Self::Ssv { k, .. } | Self::Sssv { k, .. } | Self::Trdeg { k, .. } => {
                positive("k", *k as u64)
            }
            Self::Asss {
                k,
                depth,
                s,
                r_override,
                ..
            } => {
                positive("k", *k as u64)?;
                positive("s", *s)?;
                if !(3..=16).contains(depth) {
                    return Err("`D` must be in 3..=16".into());
                }
                match r_override {
                    Some(r) => positive("R", *r),
                    None => Ok(()),
                }
            }
            Self::Bms { r, s, .. } => {
                positive("r", *r as u64)?;
                positive("s", *s)
            }
            Self::Fs { w, d, order, .. } => {
                positive("w", *w as u64)?;
                positive("d", *d as u64)?;
                if let Some(order) = order {
                    let mut sorted = order.clone();
                    sorted.sort_unstable();
                    if sorted != (1..=n).collect::<Vec<_>>() {
                        return Err(format!(
                            "order {} is not a permutation of 1..={n}",
                            join_list(order)
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for GeneratorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rc { n, r, vdm } => {
                write!(f, "rc:n={n},r={r}{}", if *vdm { ",vdm=true" } else { "" })
            }
            Self::Ssv { n, k } => write!(f, "ssv:n={n},k={k}"),
            Self::Sssv { n, k } => write!(f, "sssv:n={n},k={k}"),
            Self::Trdeg { n, k, vdm } => write!(
                f,
                "trdeg:n={n},k={k}{}",
                if *vdm { ",vdm=true" } else { "" }
            ),
            Self::Asss {
                n,
                k,
                depth,
                s,
                r_override,
            } => {
                write!(f, "asss:n={n},k={k},D={depth},s={s}")?;
                match r_override {
                    Some(r) => write!(f, ",R={r}"),
                    None => Ok(()),
                }
            }
            Self::Bms { n, r, s } => write!(f, "bms:n={n},r={r},s={s}"),
            Self::Fs { n, w, d, order } => {
                write!(f, "fs:n={n},w={w},d={d}")?;
                match order {
                    Some(o) => write!(f, ",order={}", join_list(o)),
                    None => Ok(()),
                }
            }
        }
    }
}

impl FromStr for GeneratorDescriptor {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let mut p = Params::parse(text)?;
        let desc = match p.name.as_str() {
            "rc" => Self::Rc {
                n: p.required("n")?,
                r: p.required("r")?,
                vdm: p.optional("vdm")?.unwrap_or(false),
            },
            "ssv" => Self::Ssv {
                n: p.required("n")?,
                k: p.required("k")?,
            },
            "sssv" => Self::Sssv {
                n: p.required("n")?,
                k: p.required("k")?,
            },
            "trdeg" => Self::Trdeg {
                n: p.required("n")?,
                k: p.required("k")?,
                vdm: p.optional("vdm")?.unwrap_or(false),
            },
            "asss" => Self::Asss {
                n: p.required("n")?,
                k: p.required("k")?,
                depth: p.required("D")?,
                s: p.required("s")?,
                r_override: p.optional("R")?,
            },
            "bms" => Self::Bms {
                n: p.required("n")?,
                r: p.required("r")?,
                s: p.required("s")?,
            },
            "fs" => {
                let (n, w, d) = (p.required("n")?, p.required("w")?, p.required("d")?);
                let order = p
                    .list("order")?
                    .filter(|o| *o != (1..=n).collect::<Vec<_>>());
                Self::Fs { n, w, d, order }
            }
            other => {
                return Err(format!(
                    "unknown generator `{other}`; valid kinds: {}",
                    Self::KINDS.join(", ")
                ));
            }
        };
        p.finish()?;
        desc.check()?;
        Ok(desc)
    }
}

impl Serialize for GeneratorDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GeneratorDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `c · Π_k (a_k + b_k x_k)` with seed-polynomial entries.
#[derive(Clone, Debug)]
struct Product {
    scale: SparsePoly,
    factors: Vec<(SparsePoly, SparsePoly)>,
}

/// One product evaluated at a seed point: `(c, [(a_k, b_k)])`.
pub type EvaluatedProduct = (FieldElem, Vec<(FieldElem, FieldElem)>);

#[derive(Clone, Debug)]
enum Form {
    Products(Vec<Product>),
    Fs(FsData),
    Unmaterialized,
}

/// A built generator. The arena is `x1..xn` followed by the seed block.
#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    desc: GeneratorDescriptor,
    field: PrimeField,
    arena: Arc<VarArena>,
    n: usize,
    form: Form,
    asss_r: Option<BigUint>,
}

/// Seed variable ids, allocated before the arena exists.
enum Part {
    Rc { y: Vec<VarId>, t: RcSeeds },
    Ssv { y: Vec<VarId>, z: Vec<Vec<VarId>> },
    Shift,
}

enum RcSeeds {
    Full(Vec<VarId>),
    Single(VarId),
}

struct Layout {
    names: Vec<String>,
}

impl Layout {
    fn new(n: usize) -> Self {
        Layout {
            names: (1..=n).map(|i| format!("x{i}")).collect(),
        }
    }

    fn push(&mut self, name: String) -> VarId {
        self.names.push(name);
        VarId(self.names.len() as u32 - 1)
    }

    fn rc(&mut self, n: usize, r: usize, y: &str, t: &str, vdm: bool) -> Part {
        let y = (1..=r).map(|j| self.push(format!("{y}{j}"))).collect();
        let t = if vdm {
            RcSeeds::Single(self.push(t.to_string()))
        } else {
            RcSeeds::Full((0..=n).map(|k| self.push(format!("{t}{k}"))).collect())
        };
        Part::Rc { y, t }
    }

    fn ssv(&mut self, n: usize, k: usize, y: &str, z: &str) -> Part {
        let y = (1..=k).map(|i| self.push(format!("{y}{i}"))).collect();
        let z = (1..=k)
            .map(|i| (1..=n).map(|j| self.push(format!("{z}{i}_{j}"))).collect())
            .collect();
        Part::Ssv { y, z }
    }
}

impl GeneratorSpec {
    pub fn build(desc: &GeneratorDescriptor, field: &PrimeField) -> Result<Self, GeneratorError> {
        desc.check().map_err(GeneratorError::Parameters)?;
        let n = desc.n();
        let mut layout = Layout::new(n);
        let mut asss_r = None;
        let parts = match *desc {
            GeneratorDescriptor::Rc { r, vdm, .. } => vec![layout.rc(n, r, "y", "t", vdm)],
            GeneratorDescriptor::Ssv { k, .. } => vec![layout.ssv(n, k, "y", "z")],
            GeneratorDescriptor::Sssv { k, .. } => vec![layout.ssv(n, k, "y", "z"), Part::Shift],
            GeneratorDescriptor::Trdeg { k, vdm, .. } => {
                vec![
                    layout.rc(n, k + 1, "z", "s", vdm),
                    layout.rc(n, k, "y", "t", vdm),
                ]
            }
            GeneratorDescriptor::Asss {
                k,
                depth,
                s,
                r_override,
                ..
            } => {
                let r = BigUint::from(2 * k as u64).pow((2 * depth as u32) << depth);
                asss_r = Some(r);
                match r_override {
                    None => Vec::new(),
                    Some(r) => {
                        let mut parts: Vec<Part> = (1..=depth - 2)
                            .map(|l| {
                                layout.rc(
                                    n,
                                    r as usize,
                                    &format!("y{l}_"),
                                    &format!("t{l}_"),
                                    false,
                                )
                            })
                            .collect();
                        parts.push(layout.ssv(n, asss_support(r, s) as usize, "u", "v"));
                        parts.push(Part::Shift);
                        parts
                    }
                }
            }
            GeneratorDescriptor::Bms { r, s, .. } => {
                vec![
                    layout.rc(n, r, "y", "t", false),
                    layout.ssv(n, bms_support(r, s) as usize, "w", "z"),
                    Part::Shift,
                ]
            }
            GeneratorDescriptor::Fs { .. } => Vec::new(),
        };
        if let GeneratorDescriptor::Fs {
            w, d, ref order, ..
        } = *desc
        {
            for i in 1..=n + 1 {
                layout.push(format!("y{i}"));
            }
            let order = order.clone().unwrap_or_else(|| (1..=n).collect());
            let data = FsData::new(field, n, w, d, order)?;
            let arena = VarArena::new(layout.names);
            return Ok(GeneratorSpec {
                desc: desc.clone(),
                field: field.clone(),
                arena,
                n,
                form: Form::Fs(data),
                asss_r,
            });
        }
        let arena = VarArena::new(layout.names);
        let form = if matches!(
            desc,
            GeneratorDescriptor::Asss {
                r_override: None,
                ..
            }
        ) {
            Form::Unmaterialized
        } else {
            let mut products = Vec::new();
            for part in &parts {
                products.extend(part_products(part, field, &arena, n)?);
            }
            Form::Products(products)
        };
        Ok(GeneratorSpec {
            desc: desc.clone(),
            field: field.clone(),
            arena,
            n,
            form,
            asss_r,
        })
    }

    pub fn descriptor(&self) -> &GeneratorDescriptor {
        &self.desc
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn arena(&self) -> &Arc<VarArena> {
        &self.arena
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of coordinates `N = 2^n`.
    pub fn coordinates(&self) -> usize {
        1 << self.n
    }

    pub fn x_block(&self) -> Vec<VarId> {
        (0..self.n as u32).map(VarId).collect()
    }

    pub fn seeds(&self) -> Vec<VarId> {
        (self.n as u32..self.arena.len() as u32)
            .map(VarId)
            .collect()
    }

    pub fn seed_arity(&self) -> usize {
        self.arena.len() - self.n
    }

    pub fn seed_names(&self) -> &[String] {
        &self.arena.names()[self.n..]
    }

    /// `R = (2k)^{2D·2^D}` for ASSS specs.
    pub fn asss_r(&self) -> Option<&BigUint> {
        self.asss_r.as_ref()
    }

    /// ASSS with an overridden `R`: structure only, no hitting guarantee.
    pub fn heuristic_parameters(&self) -> bool {
        matches!(
            self.desc,
            GeneratorDescriptor::Asss {
                r_override: Some(_),
                ..
            }
        )
    }

    pub fn fs(&self) -> Option<&FsData> {
        match &self.form {
            Form::Fs(data) => Some(data),
            _ => None,
        }
    }

    fn products(&self) -> Result<&[Product], GeneratorError> {
        match &self.form {
            Form::Products(p) => Ok(p),
            Form::Unmaterialized => Err(self.override_error()),
            Form::Fs(_) => Err(GeneratorError::Parameters(
                "FS specs have no product form".into(),
            )),
        }
    }

    fn override_error(&self) -> GeneratorError {
        GeneratorError::RequiresOverride {
            r: self
                .asss_r
                .as_ref()
                .map_or_else(String::new, BigUint::to_string),
        }
    }

    fn check_materialized(&self) -> Result<(), GeneratorError> {
        match self.form {
            Form::Unmaterialized => Err(self.override_error()),
            _ => Ok(()),
        }
    }

    /// Full arena point (`x = 0`) for a seed assignment.
    fn full_point(&self, alpha: &[FieldElem]) -> Result<Vec<FieldElem>, GeneratorError> {
        if alpha.len() != self.seed_arity() {
            return Err(GeneratorError::SeedArity {
                expected: self.seed_arity(),
                got: alpha.len(),
            });
        }
        let mut point = vec![FieldElem::ZERO; self.n];
        point.extend_from_slice(alpha);
        Ok(point)
    }

    /// The products evaluated at `alpha`.
    pub fn evaluated_products(
        &self,
        alpha: &[FieldElem],
    ) -> Result<Vec<EvaluatedProduct>, GeneratorError> {
        let point = self.full_point(alpha)?;
        self.products()?
            .iter()
            .map(|p| {
                let c = p.scale.eval(&point)?;
                let factors = p
                    .factors
                    .iter()
                    .map(|(a, b)| Ok((a.eval(&point)?, b.eval(&point)?)))
                    .collect::<Result<_, PolyError>>()?;
                Ok((c, factors))
            })
            .collect()
    }

    /// `coeff_x(P(x, alpha))`.
    pub fn image(&self, alpha: &[FieldElem]) -> Result<CoeffVector<FieldElem>, GeneratorError> {
        let f = &self.field;
        let entries = match &self.form {
            Form::Fs(data) => {
                if alpha.len() != self.seed_arity() {
                    return Err(GeneratorError::SeedArity {
                        expected: self.seed_arity(),
                        got: alpha.len(),
                    });
                }
                data.image(f, self.n, alpha)
            }
            _ => {
                let mut out = vec![FieldElem::ZERO; self.coordinates()];
                let mut buf = vec![FieldElem::ZERO; self.coordinates()];
                for (c, factors) in self.evaluated_products(alpha)? {
                    if c.is_zero() {
                        continue;
                    }
                    buf[0] = c;
                    for (k, &(a, b)) in factors.iter().enumerate() {
                        let half = 1 << k;
                        for mask in 0..half {
                            let v = buf[mask];
                            buf[mask | half] = f.mul(v, b);
                            buf[mask] = f.mul(v, a);
                        }
                    }
                    for (o, &v) in out.iter_mut().zip(&buf) {
                        *o = f.add(*o, v);
                    }
                }
                out
            }
        };
        Ok(CoeffVector::new(self.n, entries))
    }

    /// `coeff_x(P)` with entries polynomials in the seeds.
    pub fn symbolic_image(&self, budget: usize) -> Result<CoeffVector<SparsePoly>, GeneratorError> {
        let f = &self.field;
        if let Form::Fs(data) = &self.form {
            let p = data.witness_polynomial(f, &self.arena, self.n, budget)?;
            return Ok(p.coeff_extract(&self.x_block())?);
        }
        let zero = SparsePoly::zero(f, &self.arena);
        let mut out = vec![zero.clone(); self.coordinates()];
        for p in self.products()? {
            let mut buf = vec![zero.clone(); 1];
            buf[0] = p.scale.clone();
            for (a, b) in &p.factors {
                let mut next = Vec::with_capacity(buf.len() * 2);
                for v in &buf {
                    next.push(v.mul_budgeted(a, budget)?);
                }
                for v in &buf {
                    next.push(v.mul_budgeted(b, budget)?);
                }
                buf = next;
            }
            for (o, v) in out.iter_mut().zip(&buf) {
                o.add_assign_unchecked(v);
                if o.sparsity() > budget {
                    return Err(PolyError::ExpansionTooLarge { budget }.into());
                }
            }
        }
        Ok(CoeffVector::new(self.n, out))
    }

    pub fn witness_polynomial(&self, budget: usize) -> Result<SparsePoly, GeneratorError> {
        Ok(self.symbolic_image(budget)?.reassemble(&self.x_block())?)
    }

    /// Syntactic bound on the total seed degree of every coordinate.
    pub fn seed_degree_bound(&self) -> Result<u64, GeneratorError> {
        if let Form::Fs(data) = &self.form {
            return Ok(data.seed_degree_bound());
        }
        let deg = |p: &SparsePoly| p.total_degree().unwrap_or(0) as u64;
        Ok(self
            .products()?
            .iter()
            .map(|p| {
                deg(&p.scale)
                    + p.factors
                        .iter()
                        .map(|(a, b)| deg(a).max(deg(b)))
                        .sum::<u64>()
            })
            .max()
            .unwrap_or(0))
    }

    /// Exact total seed degree, from the symbolic image.
    pub fn seed_degree(&self, budget: usize) -> Result<u64, GeneratorError> {
        let image = self.symbolic_image(budget)?;
        Ok(image
            .entries()
            .iter()
            .filter_map(SparsePoly::total_degree)
            .max()
            .unwrap_or(0) as u64)
    }

    /// `D(coeff_x(P))` as a polynomial in the seeds.
    pub fn compose(&self, d: &Circuit, budget: usize) -> Result<SparsePoly, GeneratorError> {
        self.check_materialized()?;
        self.check_arity(d)?;
        let image = self.symbolic_image(budget)?;
        self.compose_with(d, &image, budget)
    }

    /// [`compose`](Self::compose) against a precomputed symbolic image.
    pub fn compose_with(
        &self,
        d: &Circuit,
        image: &CoeffVector<SparsePoly>,
        budget: usize,
    ) -> Result<SparsePoly, GeneratorError> {
        self.check_arity(d)?;
        Ok(d.compose(image.entries(), &self.arena, budget)?)
    }

    pub fn check_arity(&self, d: &Circuit) -> Result<(), GeneratorError> {
        if d.arity() != self.coordinates() {
            return Err(GeneratorError::Parameters(format!(
                "distinguisher has {} inputs but the generator has {} coordinates",
                d.arity(),
                self.coordinates()
            )));
        }
        Ok(())
    }

    /// Seed fixing that plants `y_j` at the coordinate of `planted[j]`
    /// (1-based subsets of `[n]`) and zeroes unused slots. SSV/SSSV only.
    pub fn ssv_plant(
        &self,
        planted: &[Vec<usize>],
    ) -> Result<HashMap<VarId, FieldElem>, GeneratorError> {
        let k = match self.desc {
            GeneratorDescriptor::Ssv { k, .. } | GeneratorDescriptor::Sssv { k, .. } => k,
            _ => {
                return Err(GeneratorError::Parameters(
                    "planting needs an ssv or sssv spec".into(),
                ))
            }
        };
        if planted.len() > k {
            return Err(GeneratorError::Parameters(format!(
                "cannot plant {} subsets with k = {k}",
                planted.len()
            )));
        }
        let mut masks: Vec<usize> = Vec::with_capacity(planted.len());
        for s in planted {
            if s.iter().any(|&i| i == 0 || i > self.n) {
                return Err(GeneratorError::Parameters(format!(
                    "subset {s:?} is not inside [{}]",
                    self.n
                )));
            }
            let mask = s.iter().fold(0usize, |m, &i| m | 1 << (i - 1));
            if masks.contains(&mask) {
                return Err(GeneratorError::Parameters(
                    "planted subsets must be distinct".into(),
                ));
            }
            masks.push(mask);
        }
        let seeds = self.seeds();
        let (y, z) = seeds.split_at(k);
        let f = &self.field;
        let mut fixing = HashMap::new();
        for i in 0..k {
            let mask = masks.get(i).copied();
            if mask.is_none() {
                fixing.insert(y[i], f.zero());
            }
            for j in 0..self.n {
                let bit = mask.is_some_and(|m| m >> j & 1 == 1);
                fixing.insert(z[i * self.n + j], if bit { f.one() } else { f.zero() });
            }
        }
        Ok(fixing)
    }

    /// The symbolic image with some seeds fixed.
    pub fn fixed_image(
        &self,
        fixing: &HashMap<VarId, FieldElem>,
        budget: usize,
    ) -> Result<CoeffVector<SparsePoly>, GeneratorError> {
        Ok(self.symbolic_image(budget)?.map(|e| e.partial_eval(fixing)))
    }

    /// FS with the x-roles permuted by `sigma` (1-based).
    pub fn order_variant(&self, sigma: &[usize]) -> Result<GeneratorSpec, GeneratorError> {
        let GeneratorDescriptor::Fs { n, w, d, .. } = self.desc else {
            return Err(GeneratorError::Parameters(
                "order variants need an fs spec".into(),
            ));
        };
        let identity: Vec<usize> = (1..=n).collect();
        let order = (sigma != identity.as_slice()).then(|| sigma.to_vec());
        GeneratorSpec::build(&GeneratorDescriptor::Fs { n, w, d, order }, &self.field)
    }

    pub fn to_json_value(&self) -> Value {
        let f = &self.field;
        let mut v = json!({
            "version": SPEC_JSON_VERSION,
            "generator": self.desc.to_string(),
            "field": {
                "prime": f.modulus(),
                "generator": f.generator().value(),
                "factors": f.factors_string(),
            },
            "n": self.n,
            "coordinates": self.coordinates(),
            "seed_arity": self.seed_arity(),
            "seeds": self.seed_names(),
            "materialized": !matches!(self.form, Form::Unmaterialized),
        });
        if let Ok(bound) = self.seed_degree_bound() {
            v["seed_degree_bound"] = json!(bound);
        }
        if let Some(r) = &self.asss_r {
            v["R"] = json!(r.to_string());
            v["R_log2"] = json!(r.bits().saturating_sub(1));
        }
        if let GeneratorDescriptor::Asss {
            r_override: Some(r),
            s,
            ..
        } = self.desc
        {
            v["sssv_support"] = json!(asss_support(r, s));
        }
        if let GeneratorDescriptor::Bms { r, s, .. } = self.desc {
            v["sssv_support"] = json!(bms_support(r, s));
        }
        if let Form::Fs(data) = &self.form {
            v["omega"] = json!(data.omega.value());
            v["omega_order"] = json!(data.omega_order);
            v["betas"] = json!(data.betas.iter().map(|b| b.value()).collect::<Vec<_>>());
        }
        if self.heuristic_parameters() {
            v["parameters"] = json!("heuristic");
        }
        v
    }

    pub fn from_json(text: &str) -> Result<GeneratorSpec, GeneratorError> {
        let bad = |m: &str| GeneratorError::Parameters(format!("spec JSON: {m}"));
        let v: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
        if v["version"].as_u64() != Some(SPEC_JSON_VERSION) {
            return Err(bad("unsupported version"));
        }
        let desc: GeneratorDescriptor = v["generator"]
            .as_str()
            .ok_or_else(|| bad("missing `generator`"))?
            .parse()
            .map_err(|e: String| bad(&e))?;
        let prime = v["field"]["prime"]
            .as_u64()
            .ok_or_else(|| bad("missing field prime"))?;
        let g = v["field"]["generator"]
            .as_u64()
            .ok_or_else(|| bad("missing field generator"))?;
        let factors = v["field"]["factors"]
            .as_str()
            .ok_or_else(|| bad("missing field factors"))?;
        let factors = PrimeField::parse_factors(factors).map_err(|e| bad(&e))?;
        let field = PrimeField::with_generator(prime, &factors, g)?;
        GeneratorSpec::build(&desc, &field)
    }
}

/// `R ⌈log s⌉ + R ⌈log R⌉`, at least 1.
pub fn asss_support(r: u64, s: u64) -> u64 {
    (r * ceil_log2(s) + r * ceil_log2(r)).max(1)
}

/// `r ⌈log s⌉ + r ⌈log r⌉`, at least 1.
pub fn bms_support(r: usize, s: u64) -> u64 {
    let r = r as u64;
    (r * ceil_log2(s) + r * ceil_log2(r)).max(1)
}

fn part_products(
    part: &Part,
    f: &PrimeField,
    arena: &Arc<VarArena>,
    n: usize,
) -> Result<Vec<Product>, GeneratorError> {
    let one = SparsePoly::one(f, arena);
    let mono = |m: Monomial| SparsePoly::monomial(f, arena, m, f.one());
    Ok(match part {
        Part::Rc { y, t } => {
            let mut out = Vec::with_capacity(y.len());
            for (j, &yj) in (1u32..).zip(y) {
                let (t0, tk): (Monomial, Vec<Monomial>) = match t {
                    RcSeeds::Full(t) => (
                        Monomial::power(t[0], j),
                        t[1..].iter().map(|&v| Monomial::power(v, j)).collect(),
                    ),
                    RcSeeds::Single(t) => {
                        let mut tk = Vec::with_capacity(n);
                        for k in 0..n as u32 {
                            let e = 1u32
                                .checked_shl(k)
                                .and_then(|p| p.checked_mul(j))
                                .ok_or_else(|| {
                                    GeneratorError::Parameters("t-exponent overflows".into())
                                })?;
                            tk.push(Monomial::power(*t, e));
                        }
                        (Monomial::power(*t, j), tk)
                    }
                };
                out.push(Product {
                    scale: mono(Monomial::var(yj).mul(&t0)),
                    factors: tk.into_iter().map(|m| (one.clone(), mono(m))).collect(),
                });
            }
            out
        }
        Part::Ssv { y, z } => y
            .iter()
            .zip(z)
            .map(|(&yi, zi)| Product {
                scale: mono(Monomial::var(yi)),
                factors: zi
                    .iter()
                    .map(|&v| {
                        let zv = mono(Monomial::var(v));
                        let mut a = zv.neg();
                        a.add_term(Monomial::one(), f.one());
                        (a, zv)
                    })
                    .collect(),
            })
            .collect(),
        Part::Shift => vec![Product {
            scale: one.clone(),
            factors: vec![(one.clone(), one); n],
        }],
    })
}
