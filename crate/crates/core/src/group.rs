//! Finite groups given by multiplication tables.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstantGroup {
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl ConstantGroup {
    /// Builds a group from a table, checking closure, associativity, identity and inverses.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty group".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidGroup("table is not a closed n x n table".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "not associative: ({} {}) {}",
                            labels[a], labels[b], labels[c]
                        )));
                    }
                }
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| table[a][b] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("{} has no inverse", labels[a])))?;
            if table[inv][a] != identity {
                return Err(Error::InvalidGroup(format!("{} has no two-sided inverse", labels[a])));
            }
            inverse.push(inv);
        }
        Ok(ConstantGroup { labels, table, identity, inverse })
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        let labels = (0..n).map(|i| if i == 0 { "e".to_string() } else { format!("g^{i}") }).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        ConstantGroup::from_table(labels, table)
    }

    pub fn trivial() -> Self {
        ConstantGroup::cyclic(1).expect("trivial group")
    }

    /// Direct product; element `(a, b)` has index `a * |other| + b`.
    pub fn product(&self, other: &ConstantGroup) -> Self {
        let m = other.order();
        let n = self.order() * m;
        let labels = (0..n)
            .map(|i| format!("({},{})", self.labels[i / m], other.labels[i % m]))
            .collect();
        let table = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| self.table[x / m][y / m] * m + other.table[x % m][y % m])
                    .collect()
            })
            .collect();
        ConstantGroup::from_table(labels, table).expect("product of groups")
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Sorted element set of the subgroup generated by `gens`.
    pub fn generated_subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut set = BTreeSet::from([self.identity]);
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    pub fn is_subgroup(&self, elems: &[usize]) -> bool {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        set.contains(&self.identity)
            && set.iter().all(|&a| set.contains(&self.inv(a)) && set.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    pub fn is_normal(&self, elems: &[usize]) -> bool {
        let set: BTreeSet<usize> = elems.iter().copied().collect();
        self.is_subgroup(elems)
            && (0..self.order()).all(|g| set.iter().all(|&h| set.contains(&self.mul(self.mul(g, h), self.inv(g)))))
    }

    /// Left cosets `gH`, ordered by smallest member; the coset of `H` itself comes first.
    pub fn left_cosets(&self, sub: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for g in std::iter::once(self.identity).chain(0..self.order()) {
            if seen[g] {
                continue;
            }
            let mut c: Vec<usize> = sub.iter().map(|&h| self.mul(g, h)).collect();
            c.sort_unstable();
            for &x in &c {
                seen[x] = true;
            }
            out.push(c);
        }
        out
    }

    /// `G / N` for a normal subgroup, with the projection `G -> G/N`.
    pub fn quotient(&self, normal: &[usize]) -> Result<(ConstantGroup, Vec<usize>)> {
        if !self.is_normal(normal) {
            return Err(Error::InvalidGroup("quotient by a subgroup that is not normal".into()));
        }
        let cosets = self.left_cosets(normal);
        let mut proj = vec![0; self.order()];
        for (i, c) in cosets.iter().enumerate() {
            for &g in c {
                proj[g] = i;
            }
        }
        let labels = cosets.iter().map(|c| format!("{}N", self.labels[c[0]])).collect();
        let table = cosets
            .iter()
            .map(|a| cosets.iter().map(|b| proj[self.mul(a[0], b[0])]).collect())
            .collect();
        Ok((ConstantGroup::from_table(labels, table)?, proj))
    }

    /// The subgroup as a group in its own right; returns it with the inclusion map.
    pub fn subgroup_as_group(&self, elems: &[usize]) -> Result<(ConstantGroup, Vec<usize>)> {
        if !self.is_subgroup(elems) {
            return Err(Error::InvalidGroup("not a subgroup".into()));
        }
        let mut incl: Vec<usize> = elems.to_vec();
        incl.sort_unstable();
        incl.dedup();
        let pos = |g: usize| incl.iter().position(|&x| x == g).expect("closed");
        let labels = incl.iter().map(|&g| self.labels[g].clone()).collect();
        let table = incl
            .iter()
            .map(|&a| incl.iter().map(|&b| pos(self.mul(a, b))).collect())
            .collect();
        Ok((ConstantGroup::from_table(labels, table)?, incl))
    }

    /// A small generating set, chosen greedily in element order.
    pub fn generators(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut cur = vec![self.identity];
        for g in 0..self.order() {
            if !cur.contains(&g) {
                gens.push(g);
                cur = self.generated_subgroup(&gens);
            }
        }
        gens
    }

    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_structure() {
        let g = ConstantGroup::cyclic(6).unwrap();
        assert_eq!(g.element_order(2), 3);
        assert_eq!(g.generated_subgroup(&[2]), vec![0, 2, 4]);
        assert!(g.is_normal(&[0, 3]));
        let (q, proj) = g.quotient(&[0, 3]).unwrap();
        assert_eq!(q.order(), 3);
        assert_eq!(proj[4], proj[1]);
        assert_eq!(g.generators(), vec![1]);
    }

    #[test]
    fn klein_four() {
        let z2 = ConstantGroup::cyclic(2).unwrap();
        let v = z2.product(&z2);
        assert_eq!(v.order(), 4);
        assert!(v.is_abelian());
        assert!((1..4).all(|g| v.element_order(g) == 2));
        assert_eq!(v.generators().len(), 2);
    }

    #[test]
    fn rejects_bad_tables() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(ConstantGroup::from_table(labels.clone(), vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(ConstantGroup::from_table(labels, vec![vec![0, 1]]).is_err());
    }

    #[test]
    fn cosets_start_with_subgroup() {
        let g = ConstantGroup::cyclic(4).unwrap();
        let c = g.left_cosets(&[0, 2]);
        assert_eq!(c, vec![vec![0, 2], vec![1, 3]]);
    }
}
