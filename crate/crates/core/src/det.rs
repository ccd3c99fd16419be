//! Division-free determinants over commutative rings with zero divisors.

use std::sync::Arc;

use crate::algebra::{Element, NormalFormAlgebra};
use crate::error::{Error, Result};
use crate::ring::{BaseRing, Scalar};

pub trait CommRing {
    type Elem: Clone;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
}

impl CommRing for BaseRing {
    type Elem = Scalar;
    fn zero(&self) -> Scalar {
        BaseRing::zero(self)
    }
    fn one(&self) -> Scalar {
        BaseRing::one(self)
    }
    fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        BaseRing::add(self, a, b)
    }
    fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        BaseRing::sub(self, a, b)
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        BaseRing::mul(self, a, b)
    }
    fn neg(&self, a: &Scalar) -> Scalar {
        BaseRing::neg(self, a)
    }
    fn is_zero(&self, a: &Scalar) -> bool {
        BaseRing::is_zero(self, a)
    }
}

impl CommRing for Arc<NormalFormAlgebra> {
    type Elem = Element;
    fn zero(&self) -> Element {
        Element::zero(self)
    }
    fn one(&self) -> Element {
        Element::one(self)
    }
    fn add(&self, a: &Element, b: &Element) -> Element {
        a + b
    }
    fn sub(&self, a: &Element, b: &Element) -> Element {
        a - b
    }
    fn mul(&self, a: &Element, b: &Element) -> Element {
        a * b
    }
    fn neg(&self, a: &Element) -> Element {
        -a
    }
    fn is_zero(&self, a: &Element) -> bool {
        a.is_zero()
    }
}

fn check_square<T>(m: &[Vec<T>]) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::Structural("determinant of a non-square matrix".into()));
    }
    Ok(n)
}

/// Determinant, using the diagonal product when the matrix is triangular and
/// Berkowitz's algorithm otherwise.
pub fn determinant<R: CommRing>(ring: &R, m: &[Vec<R::Elem>]) -> Result<R::Elem> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(ring.one());
    }
    let lower = (0..n).all(|i| (i + 1..n).all(|j| ring.is_zero(&m[i][j])));
    let upper = (0..n).all(|i| (0..i).all(|j| ring.is_zero(&m[i][j])));
    if lower || upper {
        let mut acc = m[0][0].clone();
        for (i, row) in m.iter().enumerate().skip(1) {
            acc = ring.mul(&acc, &row[i]);
        }
        return Ok(acc);
    }
    let cp = berkowitz(ring, m)?;
    let d = cp[n].clone();
    Ok(if n % 2 == 1 { ring.neg(&d) } else { d })
}

/// Coefficients `c_0..c_n` (leading first) of `det(T I - M)`, without division.
pub fn berkowitz<R: CommRing>(ring: &R, m: &[Vec<R::Elem>]) -> Result<Vec<R::Elem>> {
    let n = check_square(m)?;
    let mut vect = vec![ring.one()];
    if n == 0 {
        return Ok(vect);
    }
    vect.push(ring.neg(&m[0][0]));
    for r in 1..n {
        // leading r x r block, column above and row left of the new diagonal entry
        let col: Vec<R::Elem> = (0..r).map(|i| m[i][r].clone()).collect();
        let row: Vec<R::Elem> = (0..r).map(|j| m[r][j].clone()).collect();
        let mut t = Vec::with_capacity(r + 2);
        t.push(ring.one());
        t.push(ring.neg(&m[r][r]));
        let mut cur = col;
        for k in 0..r {
            let dot = (0..r).fold(ring.zero(), |acc, j| ring.add(&acc, &ring.mul(&row[j], &cur[j])));
            t.push(ring.neg(&dot));
            if k + 1 < r {
                cur = (0..r)
                    .map(|i| (0..r).fold(ring.zero(), |acc, j| ring.add(&acc, &ring.mul(&m[i][j], &cur[j]))))
                    .collect();
            }
        }
        // multiply the (r+2) x (r+1) lower Toeplitz matrix by vect
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..r + 2 {
            let mut acc = ring.zero();
            for (j, v) in vect.iter().enumerate() {
                if i >= j && i - j < t.len() {
                    acc = ring.add(&acc, &ring.mul(&t[i - j], v));
                }
            }
            next.push(acc);
        }
        vect = next;
    }
    Ok(vect)
}

/// Laplace expansion along the first row; exponential, used as a test oracle.
pub fn cofactor_determinant<R: CommRing>(ring: &R, m: &[Vec<R::Elem>]) -> Result<R::Elem> {
    let n = check_square(m)?;
    Ok(cofactor(ring, m, n))
}

fn cofactor<R: CommRing>(ring: &R, m: &[Vec<R::Elem>], n: usize) -> R::Elem {
    match n {
        0 => ring.one(),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = ring.zero();
            for c in 0..n {
                if ring.is_zero(&m[0][c]) {
                    continue;
                }
                let minor: Vec<Vec<R::Elem>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
                    .collect();
                let term = ring.mul(&m[0][c], &cofactor(ring, &minor, n - 1));
                acc = if c % 2 == 0 { ring.add(&acc, &term) } else { ring.sub(&acc, &term) };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraBuilder;
    use proptest::prelude::*;

    fn zmat(rows: &[&[i64]]) -> Vec<Vec<Scalar>> {
        let z = BaseRing::integers();
        rows.iter().map(|r| r.iter().map(|&v| z.from_i64(v)).collect()).collect()
    }

    #[test]
    fn small_cases() {
        let z = BaseRing::integers();
        assert_eq!(determinant(&z, &zmat(&[&[7]])).unwrap(), z.from_i64(7));
        assert_eq!(determinant(&z, &zmat(&[&[2, 0], &[0, 3]])).unwrap(), z.from_i64(6));
        assert_eq!(determinant(&z, &zmat(&[&[1, 2], &[3, 4]])).unwrap(), z.from_i64(-2));
        assert_eq!(determinant(&z, &zmat(&[&[2, 1, 1], &[1, 3, 2], &[1, 0, 0]])).unwrap(), z.from_i64(-1));
        assert!(determinant(&z, &[vec![z.one(), z.one()]]).is_err());
    }

    #[test]
    fn alpha_p_multiplication_matrix() {
        // lower-triangular p x p with x on the diagonal
        let p = 5u32;
        let a = AlgebraBuilder::new(BaseRing::prime_field(5).unwrap())
            .var("x")
            .truncation(Some(12))
            .build()
            .unwrap();
        let x = Element::variable(&a, "x").unwrap();
        let m: Vec<Vec<Element>> = (0..p as usize)
            .map(|i| {
                (0..p as usize)
                    .map(|j| match i.cmp(&j) {
                        std::cmp::Ordering::Equal => x.clone(),
                        std::cmp::Ordering::Greater => Element::from_i64(&a, (i + j) as i64),
                        _ => Element::zero(&a),
                    })
                    .collect()
            })
            .collect();
        assert_eq!(determinant(&a, &m).unwrap(), x.pow(p as u64));
        assert_eq!(cofactor_determinant(&a, &m).unwrap(), x.pow(p as u64));
        // break triangularity so that Berkowitz runs
        let mut m2 = m.clone();
        m2[0][p as usize - 1] = Element::one(&a);
        assert_eq!(determinant(&a, &m2).unwrap(), cofactor_determinant(&a, &m2).unwrap());
    }

    proptest! {
        #[test]
        fn berkowitz_matches_cofactor(n in 1usize..=4, vals in proptest::collection::vec(-9i64..10, 16)) {
            let z = BaseRing::integers();
            let m: Vec<Vec<Scalar>> = (0..n).map(|i| (0..n).map(|j| z.from_i64(vals[i * 4 + j])).collect()).collect();
            prop_assert_eq!(determinant(&z, &m).unwrap(), cofactor_determinant(&z, &m).unwrap());
            let cp = berkowitz(&z, &m).unwrap();
            let d = if n % 2 == 1 { z.neg(&cp[n]) } else { cp[n].clone() };
            prop_assert_eq!(d, cofactor_determinant(&z, &m).unwrap());
        }

        #[test]
        fn berkowitz_over_zero_divisors(n in 1usize..=4, vals in proptest::collection::vec(0i64..12, 16)) {
            let r = BaseRing::residue_ring(12).unwrap();
            let m: Vec<Vec<Scalar>> = (0..n).map(|i| (0..n).map(|j| r.from_i64(vals[i * 4 + j])).collect()).collect();
            prop_assert_eq!(determinant(&r, &m).unwrap(), cofactor_determinant(&r, &m).unwrap());
        }
    }
}
