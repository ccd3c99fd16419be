//! Exact linear algebra over the supported base rings.
//!
//! Every supported ring `R` is a free module of rank `d` over a prime chain ring
//! `P` (`Q`, `F_p` or `Z/p^k`). An `R`-linear problem is restricted to `P`, where
//! submodules are kept in Howell form: row echelon with normalized pivots
//! `p^v`, closed under the annihilator multiples `p^{k-v} * row`. Membership
//! then reduces to plain row reduction.

use serde::Serialize;

use crate::det;
use crate::error::{Error, Result};
use crate::ring::{BaseRing, PrimeRing, Scalar};

/// Howell form of a submodule of `P^width` for a chain ring `P`.
#[derive(Clone, Debug)]
pub struct Echelon {
    prime: PrimeRing,
    chain: u32,
    width: usize,
    rows: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
    // coefficient of each row in terms of the inserted vectors, when tracked
    combos: Option<Vec<Vec<Scalar>>>,
    inserted: usize,
}

impl Echelon {
    pub fn new(prime: &PrimeRing, width: usize, track: bool) -> Result<Self> {
        let (_, chain) = prime
            .chain_params()
            .ok_or_else(|| Error::UnsupportedKernelBase(format!("{prime:?} is not a local chain ring")))?;
        Ok(Echelon {
            prime: prime.clone(),
            chain,
            width,
            rows: Vec::new(),
            pivots: Vec::new(),
            combos: track.then(Vec::new),
            inserted: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> &[Vec<Scalar>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Length of the module as a `P`-module (dimension when `P` is a field).
    pub fn length(&self) -> u32 {
        self.rows
            .iter()
            .zip(&self.pivots)
            .map(|(r, &c)| self.chain - self.prime.valuation(&r[c]).unwrap_or(self.chain))
            .sum()
    }

    fn first_nonzero(&self, v: &[Scalar]) -> Option<usize> {
        v.iter().position(|c| !self.prime.is_zero(c))
    }

    fn axpy(&self, x: &mut [Scalar], q: &Scalar, row: &[Scalar]) {
        // x -= q * row
        for (a, b) in x.iter_mut().zip(row) {
            if !self.prime.is_zero(b) {
                *a = self.prime.sub(a, &self.prime.mul(q, b));
            }
        }
    }

    fn scale(&self, x: &[Scalar], q: &Scalar) -> Vec<Scalar> {
        x.iter().map(|a| self.prime.mul(a, q)).collect()
    }

    /// Adds a vector to the module; returns whether the module grew.
    pub fn insert(&mut self, v: Vec<Scalar>) -> bool {
        assert_eq!(v.len(), self.width, "vector width mismatch");
        let combo = self.combos.as_ref().map(|_| {
            let mut c = vec![self.prime.zero(); self.inserted + 1];
            c[self.inserted] = self.prime.one();
            c
        });
        if let Some(cs) = self.combos.as_mut() {
            for c in cs.iter_mut() {
                c.push(self.prime.zero());
            }
        }
        self.inserted += 1;
        let before = self.length();
        let mut stack = vec![(v, combo)];
        while let Some((mut x, mut xc)) = stack.pop() {
            while let Some(c) = self.first_nonzero(&x) {
                let pos = self.pivots.binary_search(&c);
                match pos {
                    Ok(ri) => {
                        let vx = self.prime.valuation(&x[c]).unwrap();
                        let vr = self.prime.valuation(&self.rows[ri][c]).unwrap();
                        if vx >= vr {
                            let q = self.prime.chain_div(&x[c], &self.rows[ri][c]);
                            let row = self.rows[ri].clone();
                            self.axpy(&mut x, &q, &row);
                            if let (Some(xc), Some(cs)) = (xc.as_mut(), self.combos.as_ref()) {
                                let rc = cs[ri].clone();
                                self.axpy(xc, &q, &rc);
                            }
                        } else {
                            let (nx, nxc) = self.normalize(&x, &xc, c);
                            let old = std::mem::replace(&mut self.rows[ri], nx.clone());
                            let oldc = match self.combos.as_mut() {
                                Some(cs) => Some(std::mem::replace(&mut cs[ri], nxc.clone().unwrap())),
                                None => None,
                            };
                            self.push_annihilator(&mut stack, &nx, &nxc, c);
                            x = old;
                            xc = oldc;
                        }
                    }
                    Err(at) => {
                        let (nx, nxc) = self.normalize(&x, &xc, c);
                        self.rows.insert(at, nx.clone());
                        self.pivots.insert(at, c);
                        if let Some(cs) = self.combos.as_mut() {
                            cs.insert(at, nxc.clone().unwrap());
                        }
                        self.push_annihilator(&mut stack, &nx, &nxc, c);
                        break;
                    }
                }
            }
        }
        self.length() != before
    }

    fn normalize(&self, x: &[Scalar], xc: &Option<Vec<Scalar>>, c: usize) -> (Vec<Scalar>, Option<Vec<Scalar>>) {
        let (_, unit) = self.prime.split_unit(&x[c]);
        let inv = self.prime.inv(&unit).expect("unit part is invertible");
        (self.scale(x, &inv), xc.as_ref().map(|v| self.scale(v, &inv)))
    }

    fn push_annihilator(
        &self,
        stack: &mut Vec<(Vec<Scalar>, Option<Vec<Scalar>>)>,
        row: &[Scalar],
        rc: &Option<Vec<Scalar>>,
        c: usize,
    ) {
        let v = self.prime.valuation(&row[c]).unwrap();
        if v == 0 {
            return;
        }
        let f = self.prime.uniformizer_pow(self.chain - v);
        let a = self.scale(row, &f);
        if a.iter().any(|s| !self.prime.is_zero(s)) {
            stack.push((a, rc.as_ref().map(|c| self.scale(c, &f))));
        }
    }

    /// Residual of `v` after reduction, with the combination of inserted vectors used.
    pub fn reduce(&self, v: &[Scalar]) -> (Vec<Scalar>, Option<Vec<Scalar>>) {
        let mut x = v.to_vec();
        let mut coeff = self.combos.as_ref().map(|_| vec![self.prime.zero(); self.inserted]);
        for (ri, &c) in self.pivots.iter().enumerate() {
            if self.prime.is_zero(&x[c]) {
                continue;
            }
            let vx = self.prime.valuation(&x[c]).unwrap();
            let vr = self.prime.valuation(&self.rows[ri][c]).unwrap();
            if vx < vr {
                break;
            }
            let q = self.prime.chain_div(&x[c], &self.rows[ri][c]);
            self.axpy(&mut x, &q, &self.rows[ri]);
            if let (Some(k), Some(cs)) = (coeff.as_mut(), self.combos.as_ref()) {
                for (a, b) in k.iter_mut().zip(&cs[ri]) {
                    *a = self.prime.add(a, &self.prime.mul(&q, b));
                }
            }
        }
        (x, coeff)
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let (r, _) = self.reduce(v);
        r.iter().all(|c| self.prime.is_zero(c))
    }

    /// Coefficients over the inserted vectors expressing `v`, if `v` is in the module.
    pub fn solve(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let (r, c) = self.reduce(v);
        if r.iter().all(|s| self.prime.is_zero(s)) {
            c
        } else {
            None
        }
    }
}

/// Restriction of scalars from `R` to its prime ring.
fn block(ring: &BaseRing, a: &Scalar) -> Vec<Vec<Scalar>> {
    // column j holds the coordinates of a * z^j
    let d = ring.degree();
    let mut cols = Vec::with_capacity(d);
    for j in 0..d {
        let zj = basis_scalar(ring, j);
        cols.push(ring.coords(&ring.mul(a, &zj)));
    }
    (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
}

fn basis_scalar(ring: &BaseRing, j: usize) -> Scalar {
    let d = ring.degree();
    if d == 1 {
        return ring.one();
    }
    let mut v = vec![ring.prime().zero(); d];
    v[j] = ring.prime().one();
    ring.from_coords(v)
}

pub fn restrict_vector(ring: &BaseRing, v: &[Scalar]) -> Vec<Scalar> {
    v.iter().flat_map(|s| ring.coords(s)).collect()
}

pub fn extend_vector(ring: &BaseRing, v: &[Scalar]) -> Vec<Scalar> {
    let d = ring.degree();
    v.chunks(d).map(|c| ring.from_coords(c.to_vec())).collect()
}

fn check_supported(ring: &BaseRing) -> Result<()> {
    if ring.supports_kernel() {
        Ok(())
    } else {
        Err(Error::UnsupportedKernelBase(format!(
            "{} (lift to Q or to a field first)",
            ring.spec()
        )))
    }
}

/// Generators of `{x : M x = 0}` as an `R`-module, for `M` with `rows x cols` entries.
/// Over a field the output is a reduced row echelon basis.
pub fn kernel(ring: &BaseRing, m: &[Vec<Scalar>], cols: usize) -> Result<Vec<Vec<Scalar>>> {
    check_supported(ring)?;
    let d = ring.degree();
    let rows = m.len();
    let prime = ring.prime().clone();
    // row j of [M^T | I] for each P-basis vector of the domain
    let width = rows * d + cols * d;
    let mut ech = Echelon::new(&prime, width, false)?;
    let blocks: Vec<Vec<Vec<Vec<Scalar>>>> =
        m.iter().map(|row| row.iter().map(|a| block(ring, a)).collect()).collect();
    for j in 0..cols {
        for jj in 0..d {
            let mut v = vec![prime.zero(); width];
            for i in 0..rows {
                let b = &blocks[i][j];
                for ii in 0..d {
                    v[i * d + ii] = b[ii][jj].clone();
                }
            }
            v[rows * d + j * d + jj] = prime.one();
            ech.insert(v);
        }
    }
    let mut gens: Vec<Vec<Scalar>> = ech
        .rows()
        .iter()
        .zip(ech.pivots())
        .filter(|(_, &c)| c >= rows * d)
        .map(|(r, _)| extend_vector(ring, &r[rows * d..]))
        .collect();
    if ring.is_field() {
        gens = rref(ring, &gens);
    } else {
        gens = minimize(ring, gens, cols)?;
    }
    Ok(gens)
}

/// Drops generators lying in the span of the earlier ones.
fn minimize(ring: &BaseRing, gens: Vec<Vec<Scalar>>, n: usize) -> Result<Vec<Vec<Scalar>>> {
    let mut span = Span::new(ring, n)?;
    let mut out = Vec::new();
    for g in gens {
        if !span.contains(&g) {
            span.insert(g.clone());
            out.push(g);
        }
    }
    // a second pass removes generators made redundant by later ones
    let mut i = 0;
    while i < out.len() {
        let mut s = Span::new(ring, n)?;
        for (j, g) in out.iter().enumerate() {
            if j != i {
                s.insert(g.clone());
            }
        }
        if s.contains(&out[i]) {
            out.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(out)
}

/// Reduced row echelon form over a field, zero rows dropped.
pub fn rref(ring: &BaseRing, rows: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let mut m: Vec<Vec<Scalar>> = rows.to_vec();
    let width = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..m.len()).find(|&i| !ring.is_zero(&m[i][c])) else { continue };
        m.swap(r, p);
        let inv = ring.inv(&m[r][c]).expect("field element is invertible");
        m[r] = m[r].iter().map(|a| ring.mul(a, &inv)).collect();
        for i in 0..m.len() {
            if i != r && !ring.is_zero(&m[i][c]) {
                let q = m[i][c].clone();
                let pr = m[r].clone();
                for (a, b) in m[i].iter_mut().zip(&pr) {
                    *a = ring.sub(a, &ring.mul(&q, b));
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

/// Rank over a field.
pub fn rank(ring: &BaseRing, rows: &[Vec<Scalar>]) -> usize {
    rref(ring, rows).len()
}

/// An `R`-submodule of `R^n`, kept with its generators.
#[derive(Clone, Debug)]
pub struct Span {
    ring: BaseRing,
    n: usize,
    gens: Vec<Vec<Scalar>>,
    ech: Echelon,
}

impl Span {
    pub fn new(ring: &BaseRing, n: usize) -> Result<Self> {
        check_supported(ring)?;
        Ok(Span {
            ring: ring.clone(),
            n,
            gens: Vec::new(),
            ech: Echelon::new(ring.prime(), n * ring.degree(), true)?,
        })
    }

    pub fn from_vectors(ring: &BaseRing, n: usize, vs: impl IntoIterator<Item = Vec<Scalar>>) -> Result<Self> {
        let mut s = Span::new(ring, n)?;
        for v in vs {
            s.insert(v);
        }
        Ok(s)
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Vec<Scalar>] {
        &self.gens
    }

    /// Inserts a generator; returns whether the module grew.
    pub fn insert(&mut self, v: Vec<Scalar>) -> bool {
        assert_eq!(v.len(), self.n, "vector width mismatch");
        let d = self.ring.degree();
        let mut grew = false;
        for j in 0..d {
            let zj = basis_scalar(&self.ring, j);
            let w: Vec<Scalar> = v.iter().map(|a| self.ring.mul(a, &zj)).collect();
            grew |= self.ech.insert(restrict_vector(&self.ring, &w));
        }
        self.gens.push(v);
        grew
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.ech.contains(&restrict_vector(&self.ring, v))
    }

    /// `R`-coefficients over [`Span::generators`] expressing `v`.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let c = self.ech.solve(&restrict_vector(&self.ring, v))?;
        let d = self.ring.degree();
        Some(
            c.chunks(d)
                .map(|ch| {
                    ch.iter().enumerate().fold(self.ring.zero(), |acc, (j, s)| {
                        let t = self.ring.mul(&self.ring.embed_prime(s.clone()), &basis_scalar(&self.ring, j));
                        self.ring.add(&acc, &t)
                    })
                })
                .collect(),
        )
    }

    /// Length over the prime ring; the dimension when `R` is a prime field or `Q`.
    pub fn length(&self) -> u32 {
        self.ech.length()
    }

    pub fn includes(&self, other: &Span) -> bool {
        other.gens.iter().all(|g| self.contains(g))
    }

    pub fn equals(&self, other: &Span) -> bool {
        self.length() == other.length() && self.includes(other)
    }

    /// `R`-vectors spanning the module, in echelon order.
    pub fn echelon_generators(&self) -> Vec<Vec<Scalar>> {
        let gens: Vec<Vec<Scalar>> = self.ech.rows().iter().map(|r| extend_vector(&self.ring, r)).collect();
        if self.ring.is_field() {
            rref(&self.ring, &gens)
        } else {
            minimize(&self.ring, gens, self.n).unwrap_or_default()
        }
    }

    /// The sum of this span and the given vectors.
    pub fn extended(&self, extra: impl IntoIterator<Item = Vec<Scalar>>) -> Span {
        let mut s = self.clone();
        for v in extra {
            s.insert(v);
        }
        s
    }
}

/// Solves `sum c_i columns_i = target` over `R`.
pub fn solve(ring: &BaseRing, columns: &[Vec<Scalar>], target: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
    let n = target.len();
    let s = Span::from_vectors(ring, n, columns.iter().cloned())?;
    Ok(s.coordinates(target))
}

/// Whether a square matrix over `R` is invertible.
pub fn is_invertible(ring: &BaseRing, m: &[Vec<Scalar>]) -> Result<bool> {
    if ring.supports_kernel() {
        let res = ring.residue_field().expect("local ring");
        let reduce = |s: &Scalar| -> Scalar {
            let c0 = ring.coords(s).into_iter().next().unwrap();
            if res.degree() > 1 {
                // finite field extension: the ring already is its residue field
                return s.clone();
            }
            match res.prime() {
                PrimeRing::Modular(p) => match c0 {
                    Scalar::Mod(x) => Scalar::Mod(x % p),
                    other => other,
                },
                _ => c0,
            }
        };
        let rm: Vec<Vec<Scalar>> = m.iter().map(|r| r.iter().map(reduce).collect()).collect();
        return Ok(rank(&res, &rm) == m.len());
    }
    let d = det::determinant(ring, m)?;
    Ok(ring.is_unit(&d))
}

/// A linear map between labelled free modules; `matrix[i][j]` is the coefficient of
/// codomain label `i` in the image of domain label `j`.
#[derive(Clone, Debug, Serialize)]
pub struct LinearMap {
    #[serde(skip)]
    pub ring: BaseRing,
    pub domain: Vec<String>,
    pub codomain: Vec<String>,
    #[serde(skip)]
    pub matrix: Vec<Vec<Scalar>>,
}

impl LinearMap {
    pub fn new(ring: &BaseRing, domain: Vec<String>, codomain: Vec<String>, matrix: Vec<Vec<Scalar>>) -> Result<Self> {
        if matrix.len() != codomain.len() || matrix.iter().any(|r| r.len() != domain.len()) {
            return Err(Error::Structural("matrix dimensions do not match the bases".into()));
        }
        Ok(LinearMap { ring: ring.clone(), domain, codomain, matrix })
    }

    pub fn from_columns(ring: &BaseRing, domain: Vec<String>, codomain: Vec<String>, cols: &[Vec<Scalar>]) -> Result<Self> {
        let rows = codomain.len();
        let matrix = (0..rows).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
        LinearMap::new(ring, domain, codomain, matrix)
    }

    pub fn columns(&self) -> Vec<Vec<Scalar>> {
        (0..self.domain.len())
            .map(|j| self.matrix.iter().map(|r| r[j].clone()).collect())
            .collect()
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(self.ring.zero(), |acc, (a, b)| self.ring.add(&acc, &self.ring.mul(a, b)))
            })
            .collect()
    }

    pub fn compose(&self, first: &LinearMap) -> Result<LinearMap> {
        if first.codomain != self.domain {
            return Err(Error::Structural("cannot compose maps whose bases do not align".into()));
        }
        let cols: Vec<Vec<Scalar>> = first.columns().iter().map(|c| self.apply(c)).collect();
        LinearMap::from_columns(&self.ring, first.domain.clone(), self.codomain.clone(), &cols)
    }

    pub fn kernel(&self) -> Result<Vec<Vec<Scalar>>> {
        kernel(&self.ring, &self.matrix, self.domain.len())
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(|s| self.ring.is_zero(s))
    }

    pub fn rows_text(&self) -> Vec<String> {
        self.matrix
            .iter()
            .map(|r| r.iter().map(|s| self.ring.format(s)).collect::<Vec<_>>().join(" "))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64, rows: &[&[i64]]) -> Vec<Vec<Scalar>> {
        let r = BaseRing::residue_ring(p).unwrap();
        rows.iter().map(|row| row.iter().map(|&v| r.from_i64(v)).collect()).collect()
    }

    #[test]
    fn zero_and_identity_maps() {
        let f = BaseRing::prime_field(5).unwrap();
        let z = fp(5, &[&[0, 0, 0], &[0, 0, 0]]);
        assert_eq!(kernel(&f, &z, 3).unwrap().len(), 3);
        let id = fp(5, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert!(kernel(&f, &id, 3).unwrap().is_empty());
    }

    #[test]
    fn torsion_kernel_mod_nine() {
        // 3x = 0 over Z/9 has kernel 3Z/9
        let r = BaseRing::residue_ring(9).unwrap();
        let m = fp(9, &[&[3]]);
        let k = kernel(&r, &m, 1).unwrap();
        assert_eq!(k, vec![vec![Scalar::Mod(3)]]);
        let s = Span::from_vectors(&r, 1, k).unwrap();
        assert_eq!(s.length(), 1);
        assert!(s.contains(&[Scalar::Mod(6)]));
        assert!(!s.contains(&[Scalar::Mod(1)]));
    }

    #[test]
    fn howell_property_needs_annihilator_rows() {
        // span of (3, 1) over Z/9 contains 3*(3,1) = (0,3)
        let r = BaseRing::residue_ring(9).unwrap();
        let s = Span::from_vectors(&r, 2, vec![vec![Scalar::Mod(3), Scalar::Mod(1)]]).unwrap();
        assert!(s.contains(&[Scalar::Mod(0), Scalar::Mod(3)]));
        assert!(!s.contains(&[Scalar::Mod(0), Scalar::Mod(1)]));
        let c = s.coordinates(&[Scalar::Mod(0), Scalar::Mod(3)]).unwrap();
        assert_eq!(r.mul(&c[0], &Scalar::Mod(3)), Scalar::Mod(0));
    }

    #[test]
    fn unsupported_bases() {
        let z = BaseRing::integers();
        assert!(matches!(kernel(&z, &[vec![z.one()]], 1), Err(Error::UnsupportedKernelBase(_))));
        let r6 = BaseRing::residue_ring(6).unwrap();
        assert!(matches!(kernel(&r6, &[vec![r6.one()]], 1), Err(Error::UnsupportedKernelBase(_))));
    }

    #[test]
    fn dual_number_kernel() {
        // eps * x = 0 over F_3[eps]/(eps^2) has kernel eps * R
        let f3 = BaseRing::prime_field(3).unwrap();
        let d = BaseRing::artinian(&f3, "eps", 2).unwrap();
        let eps = d.generator().unwrap();
        let k = kernel(&d, &[vec![eps.clone()]], 1).unwrap();
        assert_eq!(k.len(), 1);
        let s = Span::from_vectors(&d, 1, k).unwrap();
        assert!(s.contains(std::slice::from_ref(&eps)));
        assert!(!s.contains(&[d.one()]));
        assert_eq!(s.length(), 1);
    }

    #[test]
    fn gf4_coordinates() {
        let f4 = BaseRing::galois_field(2, 2, "z").unwrap();
        let z = f4.generator().unwrap();
        let s = Span::from_vectors(&f4, 2, vec![vec![f4.one(), z.clone()]]).unwrap();
        let target = vec![z.clone(), f4.mul(&z, &z)];
        let c = s.coordinates(&target).unwrap();
        assert_eq!(c, vec![z]);
    }

    #[test]
    fn kernel_vectors_are_in_kernel() {
        let f = BaseRing::prime_field(7).unwrap();
        let m = fp(7, &[&[1, 2, 3, 4], &[2, 4, 6, 2]]);
        let k = kernel(&f, &m, 4).unwrap();
        assert_eq!(k.len(), 2);
        let map = LinearMap::new(&f, vec!["a".into(); 4], vec!["b".into(); 2], m).unwrap();
        for v in &k {
            assert!(map.apply(v).iter().all(|s| f.is_zero(s)));
        }
    }
}
