//! Partial polarizations of elementary symmetric functions, and their expression
//! through elementary symmetric functions of monomial arguments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Exponents `(r_1..r_q)` of a monomial `(x^(1))^r_1 .. (x^(q))^r_q` taken index-wise.
pub type Pattern = Vec<u32>;

/// Integer polynomial in the `q * n` variables `x^(j)_i`; variable `(j, i)` sits at `j * n + i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalPoly {
    n: usize,
    q: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl FormalPoly {
    pub fn zero(n: usize, q: usize) -> Self {
        FormalPoly { n, q, terms: BTreeMap::new() }
    }

    pub fn one(n: usize, q: usize) -> Self {
        let mut p = FormalPoly::zero(n, q);
        p.terms.insert(vec![0; n * q], BigInt::one());
        p
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        let e = self.terms.entry(exps).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &FormalPoly) -> FormalPoly {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> FormalPoly {
        let mut out = FormalPoly::zero(self.n, self.q);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        }
        out
    }

    pub fn mul(&self, other: &FormalPoly) -> FormalPoly {
        let mut out = FormalPoly::zero(self.n, self.q);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
                out.add_term(e, x * y);
            }
        }
        out
    }

    pub fn eval(&self, values: &[Vec<i64>]) -> BigInt {
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (k, &d) in e.iter().enumerate() {
                if d > 0 {
                    t *= num_traits::pow(BigInt::from(values[k / self.n][k % self.n]), d as usize);
                }
            }
            acc += t;
        }
        acc
    }
}

fn family(j: usize, q: usize) -> String {
    if q <= 3 {
        ["x", "y", "z"][j].to_string()
    } else {
        format!("x{}", j + 1)
    }
}

fn check_alpha(alpha: &[u32], n: usize) -> Result<()> {
    let s: u32 = alpha.iter().sum();
    if s as usize > n {
        return Err(Error::Constraint(format!("|alpha| = {s} exceeds n = {n}")));
    }
    Ok(())
}

/// All ways of choosing pairwise disjoint index sets of the given sizes from `0..n`.
fn disjoint_choices(sizes: &[usize], n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(sizes: &[usize], n: usize, used: &mut Vec<bool>, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        let Some((&k, rest)) = sizes.split_first() else {
            out.push(cur.clone());
            return;
        };
        let free: Vec<usize> = (0..n).filter(|&i| !used[i]).collect();
        for set in subsets(&free, k) {
            for &i in &set {
                used[i] = true;
            }
            cur.push(set.clone());
            rec(rest, n, used, cur, out);
            cur.pop();
            for &i in &set {
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(sizes, n, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut s in subsets(&items[i + 1..], k - 1) {
            s.insert(0, x);
            out.push(s);
        }
    }
    out
}

/// Generalized polarization: for each distinct pattern `M` with count `c`, pick `c` indices
/// (disjoint across patterns) and multiply the index-wise monomials `M(x_i)`.
fn polarization_of_patterns(parts: &[(Pattern, u32)], n: usize, q: usize) -> FormalPoly {
    let sizes: Vec<usize> = parts.iter().map(|(_, c)| *c as usize).collect();
    let mut out = FormalPoly::zero(n, q);
    for choice in disjoint_choices(&sizes, n) {
        let mut e = vec![0u32; n * q];
        for ((m, _), set) in parts.iter().zip(&choice) {
            for &i in set {
                for (j, &r) in m.iter().enumerate() {
                    e[j * n + i] += r;
                }
            }
        }
        out.add_term(e, BigInt::one());
    }
    out
}

fn unit_patterns(alpha: &[u32]) -> Vec<(Pattern, u32)> {
    let q = alpha.len();
    alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(j, &a)| {
            let mut m = vec![0; q];
            m[j] = 1;
            (m, a)
        })
        .collect()
}

/// `s_{alpha_1..alpha_q}(x^(1)..x^(q))`: one monomial per tuple of disjoint index sets.
pub fn partial_polarization(alpha: &[u32], n: usize) -> Result<FormalPoly> {
    check_alpha(alpha, n)?;
    Ok(polarization_of_patterns(&unit_patterns(alpha), n, alpha.len()))
}

/// `s_j` of the index-wise monomials `M(x_i)`.
pub fn elementary_of_pattern(j: u32, m: &Pattern, n: usize) -> FormalPoly {
    polarization_of_patterns(&[(m.clone(), j)], n, m.len())
}

#[derive(Clone, Debug, Serialize)]
pub struct SumExpansion {
    pub k: u32,
    pub q: usize,
    pub n: usize,
    pub terms: usize,
    pub holds: bool,
}

/// `s_k(x^(1) + .. + x^(q)) = sum_{|alpha| = k} s_alpha`, both sides expanded.
pub fn sum_expansion(k: u32, q: usize, n: usize) -> Result<SumExpansion> {
    if k as usize > n {
        return Err(Error::Constraint(format!("k = {k} exceeds n = {n}")));
    }
    // s_k of the index-wise sums y_i = sum_j x^(j)_i
    let mut lhs = FormalPoly::zero(n, q);
    for set in subsets(&(0..n).collect::<Vec<_>>(), k as usize) {
        let mut prod = FormalPoly::one(n, q);
        for &i in &set {
            let mut y = FormalPoly::zero(n, q);
            for j in 0..q {
                let mut e = vec![0; n * q];
                e[j * n + i] = 1;
                y.add_term(e, BigInt::one());
            }
            prod = prod.mul(&y);
        }
        lhs = lhs.add(&prod);
    }
    let mut rhs = FormalPoly::zero(n, q);
    for alpha in compositions(k, q) {
        rhs = rhs.add(&partial_polarization(&alpha, n)?);
    }
    Ok(SumExpansion { k, q, n, terms: lhs.len(), holds: lhs == rhs })
}

/// All `alpha` in `N^q` with `|alpha| = k`.
pub fn compositions(k: u32, q: usize) -> Vec<Vec<u32>> {
    if q == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for a in (0..=k).rev() {
        for mut rest in compositions(k - a, q - 1) {
            rest.insert(0, a);
            out.push(rest);
        }
    }
    out
}

/// `s_j(M)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub j: u32,
    pub pattern: Pattern,
}

/// Integer polynomial in the symbols `s_j(M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymExpr {
    q: usize,
    terms: BTreeMap<Vec<(Symbol, u32)>, BigInt>,
}

impl SymExpr {
    pub fn constant(q: usize, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        SymExpr { q, terms }
    }

    pub fn symbol(q: usize, s: Symbol) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(s, 1)], BigInt::one());
        SymExpr { q, terms }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<(Symbol, u32)>, BigInt> {
        &self.terms
    }

    fn add_term(&mut self, mono: Vec<(Symbol, u32)>, c: BigInt) {
        let e = self.terms.entry(mono.clone()).or_insert_with(BigInt::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn add(&self, other: &SymExpr) -> SymExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> SymExpr {
        let mut out = SymExpr::constant(self.q, BigInt::zero());
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect();
        }
        out
    }

    pub fn mul(&self, other: &SymExpr) -> SymExpr {
        let mut out = SymExpr::constant(self.q, BigInt::zero());
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut merged: BTreeMap<Symbol, u32> = BTreeMap::new();
                for (s, e) in a.iter().chain(b) {
                    *merged.entry(s.clone()).or_insert(0) += e;
                }
                out.add_term(merged.into_iter().collect(), x * y);
            }
        }
        out
    }

    /// Patterns `M` of the symbols that occur.
    pub fn patterns_used(&self) -> BTreeSet<Pattern> {
        self.terms.keys().flat_map(|m| m.iter().map(|(s, _)| s.pattern.clone())).collect()
    }

    /// Replaces every `s_j(M)` by its expansion in `n` variables per family.
    pub fn expand(&self, n: usize) -> FormalPoly {
        let mut cache: HashMap<Symbol, FormalPoly> = HashMap::new();
        let mut out = FormalPoly::zero(n, self.q);
        for (mono, c) in &self.terms {
            let mut t = FormalPoly::one(n, self.q);
            for (s, e) in mono {
                let f = cache
                    .entry(s.clone())
                    .or_insert_with(|| elementary_of_pattern(s.j, &s.pattern, n))
                    .clone();
                for _ in 0..*e {
                    t = t.mul(&f);
                }
            }
            out = out.add(&t.scale(c));
        }
        out
    }

    /// Integer value at `values[j][i] = x^(j)_i`.
    pub fn eval(&self, values: &[Vec<i64>]) -> BigInt {
        let n = values.first().map_or(0, |v| v.len());
        let mut acc = BigInt::zero();
        for (mono, c) in &self.terms {
            let mut t = c.clone();
            for (s, e) in mono {
                let v = elementary_of_pattern(s.j, &s.pattern, n).eval(values);
                t *= num_traits::pow(v, *e as usize);
            }
            acc += t;
        }
        acc
    }

    /// A copy with one coefficient increased by one; used as a falsification control.
    pub fn corrupted(&self) -> SymExpr {
        let mut out = self.clone();
        match self.terms.keys().next() {
            Some(first) => out.add_term(first.clone(), BigInt::one()),
            None => out.add_term(Vec::new(), BigInt::one()),
        }
        out
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let pat = |m: &Pattern| -> String {
            let parts: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &r)| r > 0)
                .map(|(j, &r)| if r == 1 { family(j, self.q) } else { format!("{}^{r}", family(j, self.q)) })
                .collect();
            parts.join("*")
        };
        let mut first = true;
        // larger products first reads closer to the usual statement
        let mut items: Vec<(&Vec<(Symbol, u32)>, &BigInt)> = self.terms.iter().collect();
        items.sort_by_key(|(m, _)| std::cmp::Reverse(m.iter().map(|(_, e)| *e).sum::<u32>()));
        for (mono, c) in items {
            let neg = c.sign() == num_bigint::Sign::Minus;
            let abs = if neg { -c.clone() } else { c.clone() };
            let mut syms: Vec<&(Symbol, u32)> = mono.iter().collect();
            syms.sort_by_key(|(s, _)| (std::cmp::Reverse(s.pattern.clone()), s.j));
            let body: Vec<String> = syms
                .into_iter()
                .map(|(s, e)| {
                    let sym = format!("s{}({})", s.j, pat(&s.pattern));
                    if *e == 1 {
                        sym
                    } else {
                        format!("{sym}^{e}")
                    }
                })
                .collect();
            let text = match (body.is_empty(), abs.is_one()) {
                (true, _) => abs.to_string(),
                (false, true) => body.join("*"),
                (false, false) => format!("{abs}*{}", body.join("*")),
            };
            match (first, neg) {
                (true, true) => write!(f, "-{text}")?,
                (true, false) => write!(f, "{text}")?,
                (false, true) => write!(f, " - {text}")?,
                (false, false) => write!(f, " + {text}")?,
            }
            first = false;
        }
        Ok(())
    }
}

type MemoKey = (Vec<(Pattern, u32)>, usize);

fn memo() -> &'static Mutex<HashMap<MemoKey, SymExpr>> {
    static MEMO: OnceLock<Mutex<HashMap<MemoKey, SymExpr>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn canonical(parts: &[(Pattern, u32)]) -> Vec<(Pattern, u32)> {
    let mut m: BTreeMap<Pattern, u32> = BTreeMap::new();
    for (p, c) in parts {
        if *c > 0 && p.iter().any(|&r| r > 0) {
            *m.entry(p.clone()).or_insert(0) += c;
        }
    }
    m.into_iter().collect()
}

/// Expresses the generalized polarization of `parts` through symbols `s_j(M)`, by
/// induction on the number of indices used.
fn express_parts(parts: &[(Pattern, u32)], n: usize, q: usize) -> SymExpr {
    let parts = canonical(parts);
    let key = (parts.clone(), n);
    if let Some(e) = memo().lock().expect("memo lock").get(&key) {
        return e.clone();
    }
    let total: u32 = parts.iter().map(|(_, c)| c).sum();
    let out = if total as usize > n {
        SymExpr::constant(q, BigInt::zero())
    } else if parts.is_empty() {
        SymExpr::constant(q, BigInt::one())
    } else if parts.len() == 1 {
        SymExpr::symbol(q, Symbol { j: parts[0].1, pattern: parts[0].0.clone() })
    } else {
        // prod_t s_{c_t}(M_t) = sum over merges P' of N(P') s_{P'}, with P' = parts exactly once
        let mut e = SymExpr::constant(q, BigInt::one());
        for (m, c) in &parts {
            e = e.mul(&SymExpr::symbol(q, Symbol { j: *c, pattern: m.clone() }));
        }
        for (merged, count) in merges(&parts) {
            if canonical(&merged) == parts {
                continue;
            }
            e = e.add(&express_parts(&merged, n, q).scale(&(-count)));
        }
        e
    };
    memo().lock().expect("memo lock").insert(key, out.clone());
    out
}

/// All multisets of nonempty subsets of the distinct patterns covering pattern `t`
/// exactly `c_t` times, grouped by resulting pattern multiset, with their multiplicity.
fn merges(parts: &[(Pattern, u32)]) -> Vec<(Vec<(Pattern, u32)>, BigInt)> {
    let k = parts.len();
    let q = parts[0].0.len();
    let subsets: Vec<u32> = (1..(1u32 << k)).collect();
    let sum_of = |s: u32| -> Pattern {
        let mut v = vec![0; q];
        for (t, (m, _)) in parts.iter().enumerate() {
            if s & (1 << t) != 0 {
                for (a, b) in v.iter_mut().zip(m) {
                    *a += b;
                }
            }
        }
        v
    };
    let need: Vec<u32> = parts.iter().map(|(_, c)| *c).collect();
    let mut grouped: BTreeMap<Vec<(Pattern, u32)>, BigInt> = BTreeMap::new();
    let mut mult = vec![0u32; subsets.len()];
    fn rec(
        idx: usize,
        subsets: &[u32],
        need: &mut Vec<u32>,
        mult: &mut Vec<u32>,
        emit: &mut dyn FnMut(&[u32]),
    ) {
        if need.iter().all(|&c| c == 0) {
            emit(mult);
            return;
        }
        if idx == subsets.len() {
            return;
        }
        let s = subsets[idx];
        let members: Vec<usize> = (0..need.len()).filter(|&t| s & (1 << t) != 0).collect();
        let max = members.iter().map(|&t| need[t]).min().unwrap_or(0);
        for m in (0..=max).rev() {
            for &t in &members {
                need[t] -= m;
            }
            mult[idx] = m;
            rec(idx + 1, subsets, need, mult, emit);
            mult[idx] = 0;
            for &t in &members {
                need[t] += m;
            }
        }
    }
    let mut need_mut = need.clone();
    rec(0, &subsets, &mut need_mut, &mut mult, &mut |mult: &[u32]| {
        let mut by_pattern: BTreeMap<Pattern, Vec<u32>> = BTreeMap::new();
        for (i, &m) in mult.iter().enumerate() {
            if m > 0 {
                by_pattern.entry(sum_of(subsets[i])).or_default().push(m);
            }
        }
        // index assignments realizing this multiset: prod_Q d_Q! / prod_S m_S!
        let mut count = BigInt::one();
        let mut merged = Vec::new();
        for (pat, ms) in by_pattern {
            let d: u32 = ms.iter().sum();
            count *= factorial(d);
            for m in ms {
                count /= factorial(m);
            }
            merged.push((pat, d));
        }
        *grouped.entry(merged).or_insert_with(BigInt::zero) += count;
    });
    grouped.into_iter().collect()
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `s_alpha` as an integer polynomial in symbols `s_j(M)`.
pub fn express_in_power_products(alpha: &[u32], n: usize) -> Result<SymExpr> {
    check_alpha(alpha, n)?;
    Ok(express_parts(&unit_patterns(alpha), n, alpha.len()))
}

/// Integer evaluation of `expr` against `s_alpha` at an assignment.
pub fn verify_identity(expr: &SymExpr, alpha: &[u32], values: &[Vec<i64>]) -> Result<bool> {
    let n = values.first().map_or(0, |v| v.len());
    if values.len() != alpha.len() || values.iter().any(|v| v.len() != n) {
        return Err(Error::Constraint("assignment must give n values for each of the q families".into()));
    }
    Ok(expr.eval(values) == partial_polarization(alpha, n)?.eval(values))
}

/// Full symbolic check: the expansion of `expr` equals `s_alpha`.
pub fn verify_symbolic(expr: &SymExpr, alpha: &[u32], n: usize) -> Result<bool> {
    Ok(expr.expand(n) == partial_polarization(alpha, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_disjoint_pairs() {
        let p = partial_polarization(&[1, 1], 2).unwrap();
        assert_eq!(p.len(), 2);
        assert!(partial_polarization(&[2, 1], 2).is_err());
        assert_eq!(partial_polarization(&[0, 0], 3).unwrap(), FormalPoly::one(3, 2));
    }

    #[test]
    fn classic_identity() {
        let e = express_in_power_products(&[1, 1], 3).unwrap();
        assert_eq!(e.to_string(), "s1(x)*s1(y) - s1(x*y)");
        assert!(verify_identity(&e, &[1, 1], &[vec![1, 2], vec![3, 4]]).unwrap());
        assert_eq!(partial_polarization(&[1, 1], 2).unwrap().eval(&[vec![1, 2], vec![3, 4]]), BigInt::from(10));
        assert!(!verify_identity(&e.corrupted(), &[1, 1], &[vec![1, 2], vec![3, 4]]).unwrap());
    }

    #[test]
    fn single_family_is_a_symbol() {
        let e = express_in_power_products(&[3], 4).unwrap();
        assert_eq!(e.to_string(), "s3(x)");
    }

    #[test]
    fn sum_expansion_small() {
        let r = sum_expansion(2, 2, 3).unwrap();
        assert!(r.holds);
        assert_eq!(r.terms, 12);
    }

    #[test]
    fn two_one_at_three() {
        let e = express_in_power_products(&[2, 1], 3).unwrap();
        assert!(verify_symbolic(&e, &[2, 1], 3).unwrap());
        assert!(verify_identity(&e, &[2, 1], &[vec![1, 2, 3], vec![5, 7, 11]]).unwrap());
    }
}
