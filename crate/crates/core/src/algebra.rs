//! Finite monomial-relation algebras and their elements.
//!
//! An algebra is `R[x_1..x_r] / (relation monomials, graded monomials of degree >= N)`,
//! optionally taken `K` times as a product `A_0 x ... x A_{K-1}`. It is a free
//! `R`-module on the surviving monomials, so elements are dense coefficient
//! vectors over that basis.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ring::{BaseRing, Scalar};

/// Largest basis we are willing to materialize.
pub const MAX_DIMENSION: usize = 4096;

pub const DEFAULT_TRUNCATION: u32 = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Variable {
    pub name: String,
    /// Graded variables count towards the truncation degree.
    pub graded: bool,
}

impl Variable {
    pub fn graded(name: &str) -> Self {
        Variable { name: name.to_string(), graded: true }
    }

    pub fn ungraded(name: &str) -> Self {
        Variable { name: name.to_string(), graded: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub copy: usize,
    pub exps: Vec<u32>,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

pub struct NormalFormAlgebra {
    base: BaseRing,
    vars: Vec<Variable>,
    relations: Vec<Vec<u32>>,
    truncation: Option<u32>,
    copies: usize,
    basis: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
    // product of basis i and j as a basis index, NONE when it vanishes
    table: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl fmt::Debug for NormalFormAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NormalFormAlgebra")
            .field("base", &self.base.spec())
            .field("vars", &self.var_names())
            .field("relations", &self.relations)
            .field("truncation", &self.truncation)
            .field("copies", &self.copies)
            .field("dim", &self.basis.len())
            .finish()
    }
}

impl PartialEq for NormalFormAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && self.vars == other.vars
            && self.relations == other.relations
            && self.truncation == other.truncation
            && self.copies == other.copies
    }
}

impl Eq for NormalFormAlgebra {}

pub struct AlgebraBuilder {
    base: BaseRing,
    vars: Vec<Variable>,
    relations: Vec<Vec<(String, u32)>>,
    truncation: Option<u32>,
    copies: usize,
}

impl AlgebraBuilder {
    pub fn new(base: BaseRing) -> Self {
        AlgebraBuilder {
            base,
            vars: Vec::new(),
            relations: Vec::new(),
            truncation: Some(DEFAULT_TRUNCATION),
            copies: 1,
        }
    }

    pub fn var(mut self, name: &str) -> Self {
        self.vars.push(Variable::graded(name));
        self
    }

    pub fn ungraded_var(mut self, name: &str) -> Self {
        self.vars.push(Variable::ungraded(name));
        self
    }

    pub fn relation(mut self, factors: &[(&str, u32)]) -> Self {
        self.relations
            .push(factors.iter().map(|(n, e)| (n.to_string(), *e)).collect());
        self
    }

    pub fn truncation(mut self, n: Option<u32>) -> Self {
        self.truncation = n;
        self
    }

    pub fn copies(mut self, k: usize) -> Self {
        self.copies = k;
        self
    }

    pub fn build(self) -> Result<Arc<NormalFormAlgebra>> {
        let mut rels = Vec::new();
        for r in &self.relations {
            let mut exps = vec![0u32; self.vars.len()];
            for (name, e) in r {
                let i = self
                    .vars
                    .iter()
                    .position(|v| &v.name == name)
                    .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
                exps[i] += e;
            }
            rels.push(exps);
        }
        NormalFormAlgebra::new(self.base, self.vars, rels, self.truncation, self.copies)
    }
}

impl NormalFormAlgebra {
    pub fn new(
        base: BaseRing,
        vars: Vec<Variable>,
        relations: Vec<Vec<u32>>,
        truncation: Option<u32>,
        copies: usize,
    ) -> Result<Arc<Self>> {
        if copies == 0 {
            return Err(Error::Structural("an algebra needs at least one copy".into()));
        }
        let nv = vars.len();
        for (i, v) in vars.iter().enumerate() {
            if v.name.is_empty() || vars[..i].iter().any(|w| w.name == v.name) {
                return Err(Error::Structural(format!("bad or duplicate variable name `{}`", v.name)));
            }
        }
        let mut relations = relations;
        if relations.iter().any(|r| r.len() != nv) {
            return Err(Error::Structural("relation length does not match the variables".into()));
        }
        if relations.iter().any(|r| r.iter().all(|&e| e == 0)) {
            return Err(Error::Structural("the relation 1 = 0 kills the algebra".into()));
        }
        relations.sort();
        relations.dedup();
        // bound each variable by a pure-power relation or by the truncation
        let mut bounds = Vec::with_capacity(nv);
        for (i, v) in vars.iter().enumerate() {
            let pure = relations
                .iter()
                .filter(|r| r.iter().enumerate().all(|(j, &e)| j == i || e == 0))
                .map(|r| r[i])
                .min();
            let trunc = if v.graded { truncation } else { None };
            let b = match (pure, trunc) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => {
                    return Err(Error::Structural(format!(
                        "variable `{}` is not nilpotent: add a power relation or a truncation",
                        v.name
                    )))
                }
            };
            bounds.push(b);
        }
        let mut monos: Vec<Vec<u32>> = Vec::new();
        let mut cur = vec![0u32; nv];
        enumerate(&vars, &bounds, &relations, truncation, 0, &mut cur, &mut monos)?;
        monos.sort_by(|a, b| grlex(a, b));
        if monos.len() * copies > MAX_DIMENSION {
            return Err(Error::Structural(format!(
                "algebra dimension {} exceeds the cap {MAX_DIMENSION}",
                monos.len() * copies
            )));
        }
        let mut basis = Vec::with_capacity(monos.len() * copies);
        for c in 0..copies {
            for m in &monos {
                basis.push(Monomial { copy: c, exps: m.clone() });
            }
        }
        let index: HashMap<Monomial, usize> =
            basis.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let dim = basis.len();
        let mut table = vec![NONE; dim * dim];
        let mut scratch = Monomial { copy: 0, exps: vec![0; nv] };
        for i in 0..dim {
            for j in i..dim {
                if basis[i].copy != basis[j].copy {
                    continue;
                }
                scratch.copy = basis[i].copy;
                for k in 0..nv {
                    scratch.exps[k] = basis[i].exps[k] + basis[j].exps[k];
                }
                if let Some(&r) = index.get(&scratch) {
                    table[i * dim + j] = r as u32;
                    table[j * dim + i] = r as u32;
                }
            }
        }
        Ok(Arc::new(NormalFormAlgebra { base, vars, relations, truncation, copies, basis, index, table }))
    }

    /// Same presentation over a different base ring.
    pub fn with_base(&self, base: BaseRing) -> Result<Arc<Self>> {
        NormalFormAlgebra::new(base, self.vars.clone(), self.relations.clone(), self.truncation, self.copies)
    }

    /// Same presentation with a different truncation degree.
    pub fn with_truncation(&self, truncation: Option<u32>) -> Result<Arc<Self>> {
        NormalFormAlgebra::new(self.base.clone(), self.vars.clone(), self.relations.clone(), truncation, self.copies)
    }

    /// Same presentation taken `k` times.
    pub fn with_copies(&self, k: usize) -> Result<Arc<Self>> {
        NormalFormAlgebra::new(self.base.clone(), self.vars.clone(), self.relations.clone(), self.truncation, k)
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var_names(&self) -> Vec<String> {
        self.vars.iter().map(|v| v.name.clone()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn relations(&self) -> &[Vec<u32>] {
        &self.relations
    }

    pub fn truncation(&self) -> Option<u32> {
        self.truncation
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Basis index of the product of two basis monomials.
    #[inline]
    pub fn product_index(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.table[i * self.basis.len() + j];
        (r != NONE).then_some(r as usize)
    }

    pub fn graded_degree(&self, m: &Monomial) -> u32 {
        m.exps
            .iter()
            .zip(&self.vars)
            .filter(|(_, v)| v.graded)
            .map(|(e, _)| *e)
            .sum()
    }

    /// Whether the exponent vector survives in the quotient.
    pub fn survives(&self, exps: &[u32]) -> bool {
        if self.relations.iter().any(|r| divides(r, exps)) {
            return false;
        }
        if let Some(n) = self.truncation {
            let d: u32 = exps
                .iter()
                .zip(&self.vars)
                .filter(|(_, v)| v.graded)
                .map(|(e, _)| *e)
                .sum();
            if d >= n {
                return false;
            }
        }
        true
    }

    /// Monomial generators of the ideal that is divided out (relations and the
    /// graded monomials of degree exactly `N` not already divisible by a relation).
    pub fn ideal_generators(&self) -> Vec<Vec<u32>> {
        let mut gens = self.relations.clone();
        if let Some(n) = self.truncation {
            let graded: Vec<usize> = (0..self.vars.len()).filter(|&i| self.vars[i].graded).collect();
            let mut cur = vec![0u32; self.vars.len()];
            fill_degree(&graded, 0, n, &mut cur, &mut |e| {
                if !self.relations.iter().any(|r| divides(r, e)) {
                    gens.push(e.to_vec());
                }
            });
        }
        gens
    }

    /// Algebra generators in a fixed order: the variables when there is one copy,
    /// otherwise for each copy its idempotent followed by its variables.
    pub fn generators(self: &Arc<Self>) -> Vec<(String, Element)> {
        let mut out = Vec::new();
        if self.copies == 1 {
            for (i, v) in self.vars.iter().enumerate() {
                out.push((v.name.clone(), Element::variable_at(self, i, 0)));
            }
        } else {
            for c in 0..self.copies {
                out.push((format!("1@{c}"), Element::idempotent(self, c)));
                for (i, v) in self.vars.iter().enumerate() {
                    out.push((format!("{}@{c}", v.name), Element::variable_at(self, i, c)));
                }
            }
        }
        out
    }

    /// For each basis element, the generator indices whose product it is.
    pub fn basis_words(&self) -> Vec<Vec<usize>> {
        let nv = self.vars.len();
        self.basis
            .iter()
            .map(|m| {
                let mut w = Vec::new();
                let offset = if self.copies == 1 {
                    0
                } else {
                    w.push(m.copy * (nv + 1));
                    m.copy * (nv + 1) + 1
                };
                for (i, &e) in m.exps.iter().enumerate() {
                    for _ in 0..e {
                        w.push(offset + i);
                    }
                }
                w
            })
            .collect()
    }

    /// Canonical text of a basis monomial (without coefficient).
    pub fn format_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (v, &e) in self.vars.iter().zip(&m.exps) {
            match e {
                0 => {}
                1 => parts.push(v.name.clone()),
                _ => parts.push(format!("{}^{e}", v.name)),
            }
        }
        let body = if parts.is_empty() { "1".to_string() } else { parts.join("*") };
        if self.copies > 1 {
            format!("{body}@{}", m.copy)
        } else {
            body
        }
    }

    /// Reduces a formal combination of monomials into the algebra.
    pub fn nf_reduce(self: &Arc<Self>, raw: &[(Monomial, Scalar)]) -> Result<Element> {
        let mut out = Element::zero(self);
        for (m, c) in raw {
            if m.exps.len() != self.vars.len() || m.copy >= self.copies {
                return Err(Error::Structural("monomial does not fit the algebra".into()));
            }
            if !self.base.contains(c) {
                return Err(Error::Structural("coefficient is not in the base ring".into()));
            }
            if let Some(i) = self.index_of(m) {
                out.coeffs[i] = self.base.add(&out.coeffs[i], c);
            }
        }
        Ok(out)
    }

    /// Like [`NormalFormAlgebra::nf_reduce`] with monomials written as `(name, exponent)` lists.
    pub fn nf_reduce_named(self: &Arc<Self>, raw: &[(Vec<(&str, u32)>, Scalar)]) -> Result<Element> {
        let mut conv = Vec::with_capacity(raw.len());
        for (factors, c) in raw {
            let mut exps = vec![0u32; self.vars.len()];
            for (name, e) in factors {
                let i = self.var_index(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
                exps[i] += e;
            }
            conv.push((Monomial { copy: 0, exps }, c.clone()));
        }
        self.nf_reduce(&conv)
    }

    pub fn describe(&self) -> String {
        let mut s = format!("{}[{}]", self.base.spec(), self.var_names().join(","));
        let rels: Vec<String> = self
            .relations
            .iter()
            .map(|r| self.format_monomial(&Monomial { copy: 0, exps: r.clone() }).replace("@0", ""))
            .collect();
        if !rels.is_empty() {
            s.push_str(&format!("/({})", rels.join(",")));
        }
        if let Some(n) = self.truncation {
            s.push_str(&format!(" mod deg>={n}"));
        }
        if self.copies > 1 {
            s.push_str(&format!(" x{}", self.copies));
        }
        s
    }
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Ascending total degree, then lexicographically larger exponent vectors first.
pub fn grlex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

fn enumerate(
    vars: &[Variable],
    bounds: &[u32],
    relations: &[Vec<u32>],
    truncation: Option<u32>,
    k: usize,
    cur: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) -> Result<()> {
    if k == vars.len() {
        if !relations.iter().any(|r| divides(r, cur)) {
            out.push(cur.clone());
            if out.len() > MAX_DIMENSION {
                return Err(Error::Structural(format!("algebra dimension exceeds the cap {MAX_DIMENSION}")));
            }
        }
        return Ok(());
    }
    for e in 0..bounds[k] {
        cur[k] = e;
        if let Some(n) = truncation {
            let d: u32 = cur[..=k]
                .iter()
                .zip(vars)
                .filter(|(_, v)| v.graded)
                .map(|(e, _)| *e)
                .sum();
            if d >= n {
                break;
            }
        }
        enumerate(vars, bounds, relations, truncation, k + 1, cur, out)?;
    }
    cur[k] = 0;
    Ok(())
}

fn fill_degree(graded: &[usize], k: usize, remaining: u32, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if k == graded.len() {
        if remaining == 0 {
            f(cur);
        }
        return;
    }
    if k + 1 == graded.len() {
        cur[graded[k]] = remaining;
        f(cur);
        cur[graded[k]] = 0;
        return;
    }
    for e in 0..=remaining {
        cur[graded[k]] = e;
        fill_degree(graded, k + 1, remaining - e, cur, f);
    }
    cur[graded[k]] = 0;
}

/// A dense element of a [`NormalFormAlgebra`].
#[derive(Clone)]
pub struct Element {
    alg: Arc<NormalFormAlgebra>,
    coeffs: Vec<Scalar>,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.alg, &other.alg) || self.alg == other.alg) && self.coeffs == other.coeffs
    }
}

impl Eq for Element {}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({self})")
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = self.alg.base();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if base.is_zero(c) {
                continue;
            }
            let mono = self.alg.format_monomial(&self.alg.basis[i]);
            let cs = base.format(c);
            let term = if mono == "1" {
                cs
            } else if cs == "1" {
                mono
            } else if mono.starts_with("1@") && cs.contains('/') {
                format!("({cs}){}", &mono[1..])
            } else if mono.starts_with("1@") {
                format!("{cs}{}", &mono[1..])
            } else if cs == "-1" {
                format!("-{mono}")
            } else {
                format!("{cs}*{mono}")
            };
            match (first, term.strip_prefix('-')) {
                (true, _) => f.write_str(&term)?,
                (false, Some(rest)) => write!(f, " - {rest}")?,
                (false, None) => write!(f, " + {term}")?,
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Element {
    pub fn zero(alg: &Arc<NormalFormAlgebra>) -> Self {
        Element { alg: alg.clone(), coeffs: vec![alg.base.zero(); alg.dim()] }
    }

    pub fn one(alg: &Arc<NormalFormAlgebra>) -> Self {
        Element::from_scalar(alg, alg.base.one())
    }

    pub fn from_i64(alg: &Arc<NormalFormAlgebra>, v: i64) -> Self {
        Element::from_scalar(alg, alg.base.from_i64(v))
    }

    pub fn from_scalar(alg: &Arc<NormalFormAlgebra>, c: Scalar) -> Self {
        let mut e = Element::zero(alg);
        let nv = alg.vars.len();
        for k in 0..alg.copies {
            if let Some(i) = alg.index_of(&Monomial { copy: k, exps: vec![0; nv] }) {
                e.coeffs[i] = c.clone();
            }
        }
        e
    }

    pub fn from_coeffs(alg: &Arc<NormalFormAlgebra>, coeffs: Vec<Scalar>) -> Self {
        assert_eq!(coeffs.len(), alg.dim(), "coefficient vector has the wrong length");
        Element { alg: alg.clone(), coeffs }
    }

    /// Uniform coefficients over a finite prime ring, small integers over `Z` and `Q`.
    pub fn random(alg: &Arc<NormalFormAlgebra>, rng: &mut impl rand::Rng) -> Self {
        let base = alg.base();
        let prime = base.prime();
        let c = prime.characteristic();
        let coeffs = (0..alg.dim())
            .map(|_| {
                let coords = (0..base.degree())
                    .map(|_| {
                        let v = if c == 0 { rng.gen_range(-5..=5) } else { rng.gen_range(0..c.min(1 << 20)) as i64 };
                        prime.from_i64(v)
                    })
                    .collect();
                base.from_coords(coords)
            })
            .collect();
        Element::from_coeffs(alg, coeffs)
    }

    pub fn basis_element(alg: &Arc<NormalFormAlgebra>, i: usize) -> Self {
        let mut e = Element::zero(alg);
        e.coeffs[i] = alg.base.one();
        e
    }

    pub fn idempotent(alg: &Arc<NormalFormAlgebra>, copy: usize) -> Self {
        let mut e = Element::zero(alg);
        if let Some(i) = alg.index_of(&Monomial { copy, exps: vec![0; alg.vars.len()] }) {
            e.coeffs[i] = alg.base.one();
        }
        e
    }

    /// The variable `var` in component `copy` (zero elsewhere).
    pub fn variable_at(alg: &Arc<NormalFormAlgebra>, var: usize, copy: usize) -> Self {
        let mut exps = vec![0; alg.vars.len()];
        exps[var] = 1;
        let mut e = Element::zero(alg);
        if let Some(i) = alg.index_of(&Monomial { copy, exps }) {
            e.coeffs[i] = alg.base.one();
        }
        e
    }

    /// The variable `name` in every component.
    pub fn variable(alg: &Arc<NormalFormAlgebra>, name: &str) -> Result<Self> {
        let v = alg.var_index(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        let mut e = Element::zero(alg);
        for c in 0..alg.copies {
            e = &e + &Element::variable_at(alg, v, c);
        }
        Ok(e)
    }

    pub fn monomial(alg: &Arc<NormalFormAlgebra>, exps: &[u32]) -> Self {
        let mut e = Element::zero(alg);
        for c in 0..alg.copies {
            if let Some(i) = alg.index_of(&Monomial { copy: c, exps: exps.to_vec() }) {
                e.coeffs[i] = alg.base.one();
            }
        }
        e
    }

    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.alg
    }

    pub fn base(&self) -> &BaseRing {
        &self.alg.base
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Scalar> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    /// Nonzero `(basis index, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Scalar)> {
        let base = &self.alg.base;
        self.coeffs.iter().enumerate().filter(move |(_, c)| !base.is_zero(c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.alg.base.is_zero(c))
    }

    pub fn same_parent(&self, other: &Element) -> bool {
        Arc::ptr_eq(&self.alg, &other.alg) || self.alg == other.alg
    }

    fn check_parent(&self, other: &Element) -> Result<()> {
        if self.same_parent(other) {
            Ok(())
        } else {
            Err(Error::ParentMismatch)
        }
    }

    pub fn checked_add(&self, other: &Element) -> Result<Element> {
        self.check_parent(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_mul(&self, other: &Element) -> Result<Element> {
        self.check_parent(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &Element) -> Element {
        let base = &self.alg.base;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| base.add(a, b)).collect();
        Element { alg: self.alg.clone(), coeffs }
    }

    fn mul_unchecked(&self, other: &Element) -> Element {
        let base = &self.alg.base;
        let mut out = vec![base.zero(); self.coeffs.len()];
        let rhs: Vec<(usize, &Scalar)> = other.terms().collect();
        for (i, a) in self.terms() {
            for &(j, b) in &rhs {
                if let Some(k) = self.alg.product_index(i, j) {
                    out[k] = base.add(&out[k], &base.mul(a, b));
                }
            }
        }
        Element { alg: self.alg.clone(), coeffs: out }
    }

    pub fn scale(&self, c: &Scalar) -> Element {
        let base = &self.alg.base;
        Element { alg: self.alg.clone(), coeffs: self.coeffs.iter().map(|a| base.mul(a, c)).collect() }
    }

    pub fn pow(&self, mut e: u64) -> Element {
        let mut acc = Element::one(&self.alg);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        acc
    }

    /// Smallest graded degree of a monomial with nonzero coefficient.
    pub fn valuation(&self) -> Option<u32> {
        self.terms().map(|(i, _)| self.alg.graded_degree(&self.alg.basis[i])).min()
    }

    /// Drops every monomial of graded degree at least `d`.
    pub fn truncate_degree(&self, d: u32) -> Element {
        let mut e = self.clone();
        for (i, m) in self.alg.basis.iter().enumerate() {
            if self.alg.graded_degree(m) >= d {
                e.coeffs[i] = self.alg.base.zero();
            }
        }
        e
    }

    /// Component in copy `c` of a product algebra.
    pub fn component(&self, c: usize) -> Element {
        let mut e = Element::zero(&self.alg);
        for (i, m) in self.alg.basis.iter().enumerate() {
            if m.copy == c {
                e.coeffs[i] = self.coeffs[i].clone();
            }
        }
        e
    }

    /// Applies `f` to every coefficient, landing in `target` (same presentation).
    pub fn map_coeffs(&self, target: &Arc<NormalFormAlgebra>, f: impl Fn(&Scalar) -> Scalar) -> Element {
        debug_assert_eq!(target.dim(), self.alg.dim());
        Element { alg: target.clone(), coeffs: self.coeffs.iter().map(f).collect() }
    }
}

impl<'a> Add for &'a Element {
    type Output = Element;
    fn add(self, rhs: &'a Element) -> Element {
        assert!(self.same_parent(rhs), "operands belong to different algebras");
        self.add_unchecked(rhs)
    }
}

impl<'a> Sub for &'a Element {
    type Output = Element;
    fn sub(self, rhs: &'a Element) -> Element {
        assert!(self.same_parent(rhs), "operands belong to different algebras");
        let base = &self.alg.base;
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| base.sub(a, b)).collect();
        Element { alg: self.alg.clone(), coeffs }
    }
}

impl<'a> Mul for &'a Element {
    type Output = Element;
    fn mul(self, rhs: &'a Element) -> Element {
        assert!(self.same_parent(rhs), "operands belong to different algebras");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        let base = &self.alg.base;
        Element { alg: self.alg.clone(), coeffs: self.coeffs.iter().map(|a| base.neg(a)).collect() }
    }
}

/// Polynomial in `T` with coefficients in one algebra, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    alg: Arc<NormalFormAlgebra>,
    coeffs: Vec<Element>,
}

impl UniPoly {
    pub fn new(alg: &Arc<NormalFormAlgebra>, mut coeffs: Vec<Element>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        assert!(coeffs.iter().all(|c| c.same_parent(&Element::zero(alg))), "coefficients must share the algebra");
        UniPoly { alg: alg.clone(), coeffs }
    }

    pub fn zero(alg: &Arc<NormalFormAlgebra>) -> Self {
        UniPoly { alg: alg.clone(), coeffs: Vec::new() }
    }

    pub fn constant(c: Element) -> Self {
        let alg = c.algebra().clone();
        UniPoly::new(&alg, vec![c])
    }

    /// `T - a`.
    pub fn linear(a: &Element) -> Self {
        let alg = a.algebra().clone();
        UniPoly::new(&alg, vec![-a, Element::one(&alg)])
    }

    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.alg
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    /// Coefficient of `T^k`.
    pub fn coeff(&self, k: usize) -> Element {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Element::zero(&self.alg))
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| *c == Element::one(&self.alg))
    }

    pub fn add(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|k| &self.coeff(k) + &other.coeff(k)).collect();
        UniPoly::new(&self.alg, c)
    }

    pub fn sub(&self, other: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|k| &self.coeff(k) - &other.coeff(k)).collect();
        UniPoly::new(&self.alg, c)
    }

    pub fn mul(&self, other: &UniPoly) -> UniPoly {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero(&self.alg);
        }
        let mut c = vec![Element::zero(&self.alg); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] = &c[i + j] + &(a * b);
            }
        }
        UniPoly::new(&self.alg, c)
    }

    pub fn pow(&self, e: u32) -> UniPoly {
        let mut acc = UniPoly::constant(Element::one(&self.alg));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitutes an element for `T` (Horner).
    pub fn eval(&self, a: &Element) -> Element {
        let mut acc = Element::zero(&self.alg);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * a) + c;
        }
        acc
    }

    /// Applies an additive map to every coefficient.
    pub fn map(&self, f: impl Fn(&Element) -> Element) -> UniPoly {
        UniPoly::new(&self.alg, self.coeffs.iter().map(f).collect())
    }

    /// Signed coefficient list `sigma_1..sigma_n` of a monic polynomial of degree `n`,
    /// from `T^n - sigma_1 T^{n-1} + ... + (-1)^n sigma_n`.
    pub fn sigmas(&self) -> Vec<Element> {
        let n = self.degree().unwrap_or(0);
        (1..=n)
            .map(|i| {
                let c = self.coeff(n - i);
                if i % 2 == 1 {
                    -&c
                } else {
                    c
                }
            })
            .collect()
    }

    pub fn from_sigmas(alg: &Arc<NormalFormAlgebra>, sigmas: &[Element]) -> UniPoly {
        let n = sigmas.len();
        let mut c = vec![Element::zero(alg); n + 1];
        c[n] = Element::one(alg);
        for (k, s) in sigmas.iter().enumerate() {
            let i = k + 1;
            c[n - i] = if i % 2 == 1 { -s } else { s.clone() };
        }
        UniPoly::new(alg, c)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let cs = c.to_string();
            let cs = if cs.contains(" + ") { format!("({cs})") } else { cs };
            let t = match k {
                0 => cs,
                _ => {
                    let tp = if k == 1 { "T".to_string() } else { format!("T^{k}") };
                    if cs == "1" {
                        tp
                    } else {
                        format!("{cs}*{tp}")
                    }
                }
            };
            if !first {
                f.write_str(" + ")?;
            }
            f.write_str(&t)?;
            first = false;
        }
        Ok(())
    }
}

/// `A[T]/(T^{d+1})` for a fixed algebra `A`: large enough to hold polynomials of degree `d`.
#[derive(Debug)]
pub struct PolyExtension {
    base_alg: Arc<NormalFormAlgebra>,
    ext: Arc<NormalFormAlgebra>,
    degree: usize,
    // index in ext of (base index, T-power)
    lift: Vec<Vec<usize>>,
    // inverse of lift
    split: Vec<(usize, usize)>,
}

pub const POLY_VAR: &str = "_T";

impl PolyExtension {
    pub fn new(alg: &Arc<NormalFormAlgebra>, degree: usize) -> Result<Self> {
        let mut vars = alg.vars.clone();
        vars.push(Variable::ungraded(POLY_VAR));
        let mut relations: Vec<Vec<u32>> = alg
            .relations
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.push(0);
                r
            })
            .collect();
        let mut tr = vec![0; vars.len()];
        tr[vars.len() - 1] = degree as u32 + 1;
        relations.push(tr);
        let ext = NormalFormAlgebra::new(alg.base.clone(), vars, relations, alg.truncation, alg.copies)?;
        let mut lift = Vec::with_capacity(alg.dim());
        let mut split = vec![(0, 0); ext.dim()];
        for m in &alg.basis {
            let mut row = Vec::with_capacity(degree + 1);
            for k in 0..=degree {
                let mut exps = m.exps.clone();
                exps.push(k as u32);
                let idx = ext
                    .index_of(&Monomial { copy: m.copy, exps })
                    .expect("T is exempt from truncation");
                row.push(idx);
            }
            lift.push(row);
        }
        for (bi, row) in lift.iter().enumerate() {
            for (k, &idx) in row.iter().enumerate() {
                split[idx] = (bi, k);
            }
        }
        Ok(PolyExtension { base_alg: alg.clone(), ext, degree, lift, split })
    }

    pub fn algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.ext
    }

    pub fn base_algebra(&self) -> &Arc<NormalFormAlgebra> {
        &self.base_alg
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn t(&self) -> Element {
        let mut exps = vec![0; self.base_alg.vars.len()];
        if self.degree == 0 {
            return Element::zero(&self.ext);
        }
        exps.push(1);
        Element::monomial(&self.ext, &exps)
    }

    pub fn embed(&self, a: &Element) -> Element {
        let mut e = Element::zero(&self.ext);
        for (i, c) in a.terms() {
            e.coeffs[self.lift[i][0]] = c.clone();
        }
        e
    }

    pub fn embed_poly(&self, p: &UniPoly) -> Element {
        let mut e = Element::zero(&self.ext);
        for (k, c) in p.coeffs().iter().enumerate() {
            assert!(k <= self.degree, "polynomial degree exceeds the extension");
            for (i, s) in c.terms() {
                e.coeffs[self.lift[i][k]] = s.clone();
            }
        }
        e
    }

    pub fn to_poly(&self, e: &Element) -> UniPoly {
        let mut c = vec![Element::zero(&self.base_alg); self.degree + 1];
        for (idx, s) in e.terms() {
            let (bi, k) = self.split[idx];
            c[k].coeffs[bi] = s.clone();
        }
        UniPoly::new(&self.base_alg, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5_t(n: u32) -> Arc<NormalFormAlgebra> {
        AlgebraBuilder::new(BaseRing::prime_field(5).unwrap())
            .var("t")
            .truncation(Some(n))
            .build()
            .unwrap()
    }

    #[test]
    fn relation_kills_xy() {
        let a = AlgebraBuilder::new(BaseRing::prime_field(5).unwrap())
            .var("x")
            .var("y")
            .relation(&[("x", 1), ("y", 1)])
            .truncation(Some(4))
            .build()
            .unwrap();
        let one = a.base().one();
        let e = a.nf_reduce_named(&[(vec![("x", 1), ("y", 1)], one)]).unwrap();
        assert!(e.is_zero());
        let x = Element::variable(&a, "x").unwrap();
        let y = Element::variable(&a, "y").unwrap();
        let s = &x + &y;
        assert_eq!(&s * &s, &(&x * &x) + &(&y * &y));
    }

    #[test]
    fn truncation_and_characteristic() {
        let a = AlgebraBuilder::new(BaseRing::prime_field(3).unwrap())
            .var("t")
            .truncation(Some(4))
            .build()
            .unwrap();
        let b = a.base().clone();
        assert!(a.nf_reduce_named(&[(vec![("t", 5)], b.one())]).unwrap().is_zero());
        let e = a
            .nf_reduce_named(&[(vec![("t", 1)], b.from_i64(3)), (vec![("t", 2)], b.zero())])
            .unwrap();
        assert!(e.is_zero());
        assert!(matches!(
            a.nf_reduce_named(&[(vec![("s", 1)], b.one())]),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn basis_is_graded_lex() {
        let a = AlgebraBuilder::new(BaseRing::prime_field(2).unwrap())
            .var("x")
            .var("y")
            .truncation(Some(3))
            .build()
            .unwrap();
        let names: Vec<String> = a.basis().iter().map(|m| a.format_monomial(m)).collect();
        assert_eq!(names, ["1", "x", "y", "x^2", "x*y", "y^2"]);
    }

    #[test]
    fn t_squared() {
        let a = f5_t(8);
        let t = Element::variable(&a, "t").unwrap();
        assert_eq!((&t * &t).to_string(), "t^2");
    }

    #[test]
    fn poly_extension_round_trip() {
        let a = f5_t(4);
        let ext = PolyExtension::new(&a, 2).unwrap();
        let t = Element::variable(&a, "t").unwrap();
        let p = UniPoly::linear(&t).mul(&UniPoly::linear(&-&t));
        let e = ext.embed_poly(&p);
        assert_eq!(ext.to_poly(&e), p);
        let tt = ext.t();
        let lhs = &(&tt - &ext.embed(&t)) * &(&tt + &ext.embed(&t));
        assert_eq!(ext.to_poly(&lhs), p);
    }

    #[test]
    fn product_algebra_components() {
        let a = f5_t(3).with_copies(2).unwrap();
        let s = Element::variable(&a, "t").unwrap();
        let e0 = Element::idempotent(&a, 0);
        let e1 = Element::idempotent(&a, 1);
        assert!((&e0 * &e1).is_zero());
        assert_eq!(&e0 + &e1, Element::one(&a));
        assert_eq!((&s * &e0).to_string(), "t@0");
        assert_eq!(e1.to_string(), "1@1");
    }

    #[test]
    fn sigma_round_trip() {
        let a = f5_t(8);
        let t = Element::variable(&a, "t").unwrap();
        let p = UniPoly::linear(&t).mul(&UniPoly::linear(&-&t));
        let s = p.sigmas();
        assert!(s[0].is_zero());
        assert_eq!(s[1], -&(&t * &t));
        assert_eq!(UniPoly::from_sigmas(&a, &s), p);
    }
}
