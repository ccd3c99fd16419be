//! Exact coefficient rings.
//!
//! Every base ring is a prime ring (`Z`, `Q` or `Z/n`), optionally extended by
//! one generator modulo a monic polynomial. The extension is either artinian
//! (`eps^m = 0`) or a finite field `GF(p^e)`. Elements are [`Scalar`] values
//! whose representation is fixed by the ring, so structural equality is ring
//! equality.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Int(BigInt),
    Rat(BigRational),
    Mod(u64),
    /// Coefficients `c_0 .. c_{d-1}` of `c_0 + c_1 z + ...` in an extension.
    Ext(Vec<Scalar>),
}

impl Scalar {
    /// Bit size of the unbounded (integer or rational) part; zero over `Z/n`.
    pub fn height_bits(&self) -> u64 {
        match self {
            Scalar::Int(x) => x.bits(),
            Scalar::Rat(x) => x.numer().bits() + x.denom().bits(),
            Scalar::Mod(_) => 0,
            Scalar::Ext(cs) => cs.iter().map(Scalar::height_bits).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PrimeRing {
    Integers,
    Rationals,
    Modular(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExtensionKind {
    /// `z^m = 0`.
    Artinian { order: u32 },
    /// `GF(p^e)` presented by an irreducible modulus.
    Field { degree: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Extension {
    pub symbol: String,
    pub kind: ExtensionKind,
    /// Lower coefficients of the monic modulus `z^d + c_{d-1} z^{d-1} + ... + c_0`.
    pub modulus: Vec<Scalar>,
}

/// Classification matching the usual names of the supported rings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingKind {
    Integers,
    Rationals,
    PrimeField(u64),
    ResidueRing(u64),
    ArtinianExtension { base: Box<RingKind>, order: u32 },
    GaloisField { p: u64, degree: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BaseRing {
    prime: PrimeRing,
    ext: Option<Extension>,
}

// num-rational reduces through a binary gcd, which is slow against a unit
// operand; these skip the gcd whenever a denominator is one.
fn is_unit(n: &BigInt) -> bool {
    n.magnitude().is_one()
}

fn rat_add(x: &BigRational, y: &BigRational) -> BigRational {
    if x.is_zero() {
        return y.clone();
    }
    if y.is_zero() {
        return x.clone();
    }
    if x.denom().is_one() && y.denom().is_one() {
        return BigRational::new_raw(x.numer() + y.numer(), BigInt::one());
    }
    x + y
}

fn rat_mul(x: &BigRational, y: &BigRational) -> BigRational {
    if x.is_zero() || y.is_zero() {
        return BigRational::zero();
    }
    let cross = |n: &BigInt, d: &BigInt| if is_unit(n) || d.is_one() { BigInt::one() } else { n.gcd(d) };
    let g1 = cross(x.numer(), y.denom());
    let g2 = cross(y.numer(), x.denom());
    let numer = (x.numer() / &g1) * (y.numer() / &g2);
    let denom = (x.denom() / &g2) * (y.denom() / &g1);
    BigRational::new_raw(numer, denom)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `Some((p, k))` when `n = p^k` for a prime `p`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= n && !n.is_multiple_of(p) {
        p += 1;
    }
    if !n.is_multiple_of(p) {
        p = n;
    }
    let mut m = n;
    let mut k = 0;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p, k))
}

fn mod_inverse(a: u64, n: u64) -> Option<u64> {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (n as i128, (a % n) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(n as i128) as u64)
}

impl PrimeRing {
    pub fn zero(&self) -> Scalar {
        match self {
            PrimeRing::Integers => Scalar::Int(BigInt::zero()),
            PrimeRing::Rationals => Scalar::Rat(BigRational::zero()),
            PrimeRing::Modular(_) => Scalar::Mod(0),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self {
            PrimeRing::Integers => Scalar::Int(BigInt::from(v)),
            PrimeRing::Rationals => Scalar::Rat(BigRational::from_integer(BigInt::from(v))),
            PrimeRing::Modular(n) => Scalar::Mod((v as i128).rem_euclid(*n as i128) as u64),
        }
    }

    pub fn from_bigint(&self, v: &BigInt) -> Scalar {
        match self {
            PrimeRing::Integers => Scalar::Int(v.clone()),
            PrimeRing::Rationals => Scalar::Rat(BigRational::from_integer(v.clone())),
            PrimeRing::Modular(n) => {
                let r = v.mod_floor(&BigInt::from(*n));
                Scalar::Mod(r.to_u64().unwrap_or(0))
            }
        }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            PrimeRing::Modular(n) => *n,
            _ => 0,
        }
    }

    pub fn is_field(&self) -> bool {
        match self {
            PrimeRing::Integers => false,
            PrimeRing::Rationals => true,
            PrimeRing::Modular(n) => is_prime(*n),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (PrimeRing::Modular(n), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u128 + *y as u128) % *n as u128) as u64)
            }
            (PrimeRing::Integers, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x + y),
            (PrimeRing::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(rat_add(x, y)),
            _ => panic!("scalar representation does not match prime ring {self:?}"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (PrimeRing::Modular(n), Scalar::Mod(x)) => Scalar::Mod(if *x == 0 { 0 } else { n - x }),
            (PrimeRing::Integers, Scalar::Int(x)) => Scalar::Int(-x),
            (PrimeRing::Rationals, Scalar::Rat(x)) => Scalar::Rat(-x),
            _ => panic!("scalar representation does not match prime ring {self:?}"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (PrimeRing::Modular(n), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u128 * *y as u128) % *n as u128) as u64)
            }
            (PrimeRing::Integers, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x * y),
            (PrimeRing::Rationals, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(rat_mul(x, y)),
            _ => panic!("scalar representation does not match prime ring {self:?}"),
        }
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Mod(x) => *x == 0,
            Scalar::Int(x) => x.is_zero(),
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Ext(_) => panic!("extension scalar in prime ring"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match (self, a) {
            (PrimeRing::Modular(n), Scalar::Mod(x)) => mod_inverse(*x, *n).map(Scalar::Mod),
            (PrimeRing::Integers, Scalar::Int(x)) => {
                (x.is_one() || (-x).is_one()).then(|| Scalar::Int(x.clone()))
            }
            (PrimeRing::Rationals, Scalar::Rat(x)) => (!x.is_zero()).then(|| Scalar::Rat(x.recip())),
            _ => panic!("scalar representation does not match prime ring {self:?}"),
        }
    }

    /// `(p, k)` for `Z/p^k`, `(0, 1)` for `Q`; `None` when the ring is not a chain ring.
    pub fn chain_params(&self) -> Option<(u64, u32)> {
        match self {
            PrimeRing::Rationals => Some((0, 1)),
            PrimeRing::Modular(n) => prime_power(*n),
            PrimeRing::Integers => None,
        }
    }

    /// Valuation with respect to the uniformizer of a chain ring. Zero has no valuation.
    pub fn valuation(&self, a: &Scalar) -> Option<u32> {
        if self.is_zero(a) {
            return None;
        }
        match (self, a) {
            (PrimeRing::Modular(n), Scalar::Mod(x)) => {
                let (p, _) = prime_power(*n)?;
                let mut v = 0;
                let mut x = *x;
                while x % p == 0 {
                    x /= p;
                    v += 1;
                }
                Some(v)
            }
            (PrimeRing::Rationals, _) => Some(0),
            _ => None,
        }
    }

    /// Writes `a = pi^v * u` with `u` a unit.
    pub fn split_unit(&self, a: &Scalar) -> (u32, Scalar) {
        match (self, a) {
            (PrimeRing::Modular(n), Scalar::Mod(x)) => {
                let (p, _) = prime_power(*n).expect("chain ring");
                let mut v = 0;
                let mut x = *x;
                while x % p == 0 && x != 0 {
                    x /= p;
                    v += 1;
                }
                (v, Scalar::Mod(x % n))
            }
            _ => (0, a.clone()),
        }
    }

    pub fn uniformizer_pow(&self, e: u32) -> Scalar {
        match self {
            PrimeRing::Modular(n) => {
                let (p, _) = prime_power(*n).expect("chain ring");
                let mut r: u128 = 1;
                for _ in 0..e {
                    r = (r * p as u128) % *n as u128;
                }
                Scalar::Mod(r as u64)
            }
            _ => self.one(),
        }
    }

    /// Some `c` with `b * c = a`, assuming `v(a) >= v(b)` in a chain ring.
    pub fn chain_div(&self, a: &Scalar, b: &Scalar) -> Scalar {
        if self.is_zero(a) {
            return self.zero();
        }
        let (va, ua) = self.split_unit(a);
        let (vb, ub) = self.split_unit(b);
        debug_assert!(va >= vb);
        let inv = self.inv(&ub).expect("unit part is invertible");
        let q = self.mul(&ua, &inv);
        self.mul(&q, &self.uniformizer_pow(va - vb))
    }

    pub fn to_bigint(&self, a: &Scalar) -> Option<BigInt> {
        match a {
            Scalar::Int(x) => Some(x.clone()),
            Scalar::Mod(x) => Some(BigInt::from(*x)),
            Scalar::Rat(x) => x.is_integer().then(|| x.to_integer()),
            Scalar::Ext(_) => None,
        }
    }

    fn fmt_scalar(&self, a: &Scalar) -> String {
        match a {
            Scalar::Int(x) => x.to_string(),
            Scalar::Rat(x) => {
                if x.is_integer() {
                    x.to_integer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
            Scalar::Mod(x) => x.to_string(),
            Scalar::Ext(_) => panic!("extension scalar in prime ring"),
        }
    }

    fn spec(&self) -> String {
        match self {
            PrimeRing::Integers => "Z".into(),
            PrimeRing::Rationals => "Q".into(),
            PrimeRing::Modular(n) if is_prime(*n) => format!("F_{n}"),
            PrimeRing::Modular(n) => format!("Z/{n}"),
        }
    }
}

impl BaseRing {
    pub fn integers() -> Self {
        BaseRing { prime: PrimeRing::Integers, ext: None }
    }

    pub fn rationals() -> Self {
        BaseRing { prime: PrimeRing::Rationals, ext: None }
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        if p > u32::MAX as u64 {
            return Err(Error::Structural(format!("modulus {p} is too large")));
        }
        if !is_prime(p) {
            return Err(Error::Structural(format!("{p} is not prime")));
        }
        Ok(BaseRing { prime: PrimeRing::Modular(p), ext: None })
    }

    pub fn residue_ring(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Structural(format!("residue ring modulus {n} must be at least 2")));
        }
        if n > u32::MAX as u64 {
            return Err(Error::Structural(format!("modulus {n} is too large")));
        }
        Ok(BaseRing { prime: PrimeRing::Modular(n), ext: None })
    }

    /// `base[symbol]/(symbol^order)`.
    pub fn artinian(base: &BaseRing, symbol: &str, order: u32) -> Result<Self> {
        if base.ext.is_some() {
            return Err(Error::Structural("nested extensions are not supported".into()));
        }
        if base.prime == PrimeRing::Integers {
            return Err(Error::Structural("artinian extension needs a field or Z/p^k base".into()));
        }
        if order < 1 {
            return Err(Error::Structural("nilpotency order must be at least 1".into()));
        }
        let modulus = vec![base.prime.zero(); order as usize];
        Ok(BaseRing {
            prime: base.prime.clone(),
            ext: Some(Extension {
                symbol: symbol.to_string(),
                kind: ExtensionKind::Artinian { order },
                modulus,
            }),
        })
    }

    /// `GF(p^e)` with the lexicographically smallest monic irreducible modulus.
    pub fn galois_field(p: u64, degree: u32, symbol: &str) -> Result<Self> {
        if p > u32::MAX as u64 {
            return Err(Error::Structural(format!("modulus {p} is too large")));
        }
        if !is_prime(p) {
            return Err(Error::Structural(format!("{p} is not prime")));
        }
        if degree == 0 {
            return Err(Error::Structural("field degree must be positive".into()));
        }
        if degree == 1 {
            return BaseRing::prime_field(p);
        }
        if p.checked_pow(degree).is_none_or(|q| q > 1_000_000) {
            return Err(Error::Structural("field too large".into()));
        }
        let modulus = smallest_irreducible(p, degree as usize);
        Ok(BaseRing {
            prime: PrimeRing::Modular(p),
            ext: Some(Extension {
                symbol: symbol.to_string(),
                kind: ExtensionKind::Field { degree },
                modulus: modulus.into_iter().map(Scalar::Mod).collect(),
            }),
        })
    }

    pub fn prime(&self) -> &PrimeRing {
        &self.prime
    }

    pub fn extension(&self) -> Option<&Extension> {
        self.ext.as_ref()
    }

    /// The ring with the extension stripped.
    pub fn prime_base(&self) -> BaseRing {
        BaseRing { prime: self.prime.clone(), ext: None }
    }

    pub fn kind(&self) -> RingKind {
        let prime_kind = match self.prime {
            PrimeRing::Integers => RingKind::Integers,
            PrimeRing::Rationals => RingKind::Rationals,
            PrimeRing::Modular(n) if is_prime(n) => RingKind::PrimeField(n),
            PrimeRing::Modular(n) => RingKind::ResidueRing(n),
        };
        match &self.ext {
            None => prime_kind,
            Some(Extension { kind: ExtensionKind::Artinian { order }, .. }) => {
                RingKind::ArtinianExtension { base: Box::new(prime_kind), order: *order }
            }
            Some(Extension { kind: ExtensionKind::Field { degree }, .. }) => RingKind::GaloisField {
                p: self.prime.characteristic(),
                degree: *degree,
            },
        }
    }

    /// Rank of the ring as a free module over its prime ring.
    pub fn degree(&self) -> usize {
        self.ext.as_ref().map_or(1, |e| e.modulus.len())
    }

    pub fn characteristic(&self) -> u64 {
        self.prime.characteristic()
    }

    /// Characteristic of the residue field (`0` for `Q`-based rings).
    pub fn residue_characteristic(&self) -> Option<u64> {
        match self.prime {
            PrimeRing::Rationals => Some(0),
            PrimeRing::Modular(n) => prime_power(n).map(|(p, _)| p),
            PrimeRing::Integers => None,
        }
    }

    pub fn is_field(&self) -> bool {
        match &self.ext {
            None => self.prime.is_field(),
            Some(e) => match e.kind {
                ExtensionKind::Field { .. } => true,
                ExtensionKind::Artinian { order } => order == 1 && self.prime.is_field(),
            },
        }
    }

    /// Local artinian ring or field whose linear algebra is supported.
    pub fn supports_kernel(&self) -> bool {
        self.prime.chain_params().is_some()
    }

    pub fn zero(&self) -> Scalar {
        match &self.ext {
            None => self.prime.zero(),
            Some(e) => Scalar::Ext(vec![self.prime.zero(); e.modulus.len()]),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        self.embed_prime(self.prime.from_i64(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> Scalar {
        self.embed_prime(self.prime.from_bigint(v))
    }

    pub fn from_rational(&self, v: &BigRational) -> Result<Scalar> {
        match self.prime {
            PrimeRing::Rationals => Ok(self.embed_prime(Scalar::Rat(v.clone()))),
            _ => {
                let num = self.from_bigint(v.numer());
                let den = self.from_bigint(v.denom());
                let inv = self
                    .inv(&den)
                    .ok_or_else(|| Error::Structural(format!("denominator {} is not invertible", v.denom())))?;
                Ok(self.mul(&num, &inv))
            }
        }
    }

    /// Image of a prime-ring scalar.
    pub fn embed_prime(&self, s: Scalar) -> Scalar {
        match &self.ext {
            None => s,
            Some(e) => {
                let mut v = vec![self.prime.zero(); e.modulus.len()];
                if let Some(first) = v.first_mut() {
                    *first = s;
                }
                Scalar::Ext(v)
            }
        }
    }

    /// The adjoined generator, if any.
    pub fn generator(&self) -> Option<Scalar> {
        let e = self.ext.as_ref()?;
        let d = e.modulus.len();
        let mut v = vec![self.prime.zero(); d];
        if d == 1 {
            // z = -c_0 when the modulus is linear
            v[0] = self.prime.neg(&e.modulus[0]);
        } else {
            v[1] = self.prime.one();
        }
        Some(Scalar::Ext(v))
    }

    pub fn coords(&self, a: &Scalar) -> Vec<Scalar> {
        match a {
            Scalar::Ext(v) => v.clone(),
            other => vec![other.clone()],
        }
    }

    pub fn from_coords(&self, coords: Vec<Scalar>) -> Scalar {
        if self.ext.is_some() {
            Scalar::Ext(coords)
        } else {
            coords.into_iter().next().expect("one coordinate")
        }
    }

    /// Whether `a` has the representation this ring uses.
    pub fn contains(&self, a: &Scalar) -> bool {
        let prime_ok = |s: &Scalar| match (&self.prime, s) {
            (PrimeRing::Integers, Scalar::Int(_)) => true,
            (PrimeRing::Rationals, Scalar::Rat(_)) => true,
            (PrimeRing::Modular(n), Scalar::Mod(x)) => x < n,
            _ => false,
        };
        match (&self.ext, a) {
            (None, s) => prime_ok(s),
            (Some(e), Scalar::Ext(v)) => v.len() == e.modulus.len() && v.iter().all(prime_ok),
            _ => false,
        }
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Ext(v) => v.iter().all(|c| self.prime.is_zero(c)),
            s => self.prime.is_zero(s),
        }
    }

    pub fn is_one(&self, a: &Scalar) -> bool {
        *a == self.one()
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Ext(x), Scalar::Ext(y)) => {
                Scalar::Ext(x.iter().zip(y).map(|(u, v)| self.prime.add(u, v)).collect())
            }
            _ => self.prime.add(a, b),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Ext(x) => Scalar::Ext(x.iter().map(|u| self.prime.neg(u)).collect()),
            _ => self.prime.neg(a),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b, &self.ext) {
            (Scalar::Ext(x), Scalar::Ext(y), Some(e)) => Scalar::Ext(self.poly_mulmod(x, y, &e.modulus)),
            _ => self.prime.mul(a, b),
        }
    }

    fn poly_mulmod(&self, x: &[Scalar], y: &[Scalar], modulus: &[Scalar]) -> Vec<Scalar> {
        let d = modulus.len();
        let p = &self.prime;
        let mut prod = vec![p.zero(); 2 * d];
        for (i, u) in x.iter().enumerate() {
            if p.is_zero(u) {
                continue;
            }
            for (j, v) in y.iter().enumerate() {
                if p.is_zero(v) {
                    continue;
                }
                prod[i + j] = p.add(&prod[i + j], &p.mul(u, v));
            }
        }
        for i in (d..2 * d).rev() {
            let c = std::mem::replace(&mut prod[i], p.zero());
            if p.is_zero(&c) {
                continue;
            }
            // z^i = z^{i-d} * z^d = -z^{i-d} * sum c_j z^j
            for (j, m) in modulus.iter().enumerate() {
                let t = p.mul(&c, m);
                prod[i - d + j] = p.sub(&prod[i - d + j], &t);
            }
        }
        prod.truncate(d);
        prod
    }

    pub fn pow(&self, a: &Scalar, mut e: u64) -> Scalar {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match (&self.ext, a) {
            (None, _) => self.prime.inv(a),
            (Some(e), Scalar::Ext(x)) => match e.kind {
                ExtensionKind::Artinian { .. } => {
                    let c0inv = self.prime.inv(&x[0])?;
                    let d = x.len();
                    let mut out = vec![self.prime.zero(); d];
                    out[0] = c0inv.clone();
                    for k in 1..d {
                        let mut s = self.prime.zero();
                        for j in 1..=k {
                            s = self.prime.add(&s, &self.prime.mul(&x[j], &out[k - j]));
                        }
                        out[k] = self.prime.neg(&self.prime.mul(&c0inv, &s));
                    }
                    Some(Scalar::Ext(out))
                }
                ExtensionKind::Field { degree } => {
                    if self.is_zero(a) {
                        return None;
                    }
                    let q = self.prime.characteristic().pow(degree);
                    Some(self.pow(a, q - 2))
                }
            },
            _ => None,
        }
    }

    pub fn is_unit(&self, a: &Scalar) -> bool {
        self.inv(a).is_some()
    }

    /// Canonical text for a scalar.
    pub fn format(&self, a: &Scalar) -> String {
        match (&self.ext, a) {
            (Some(e), Scalar::Ext(v)) => {
                let mut parts = Vec::new();
                for (i, c) in v.iter().enumerate() {
                    if self.prime.is_zero(c) {
                        continue;
                    }
                    let cs = self.prime.fmt_scalar(c);
                    let term = match i {
                        0 => cs,
                        _ => {
                            let z = if i == 1 { e.symbol.clone() } else { format!("{}^{}", e.symbol, i) };
                            if cs == "1" {
                                z
                            } else {
                                format!("{cs}*{z}")
                            }
                        }
                    };
                    parts.push(term);
                }
                match parts.len() {
                    0 => "0".into(),
                    1 => parts.pop().unwrap(),
                    _ => format!("({})", parts.join(" + ")),
                }
            }
            _ => self.prime.fmt_scalar(a),
        }
    }

    /// Text accepted by [`crate::parse::parse_ring`].
    pub fn spec(&self) -> String {
        let base = self.prime.spec();
        match &self.ext {
            None => base,
            Some(Extension { symbol, kind: ExtensionKind::Artinian { order }, .. }) => {
                format!("{base}[{symbol}]/({symbol}^{order})")
            }
            Some(Extension { symbol, kind: ExtensionKind::Field { degree }, .. }) => {
                format!("GF({}^{degree})[{symbol}]", self.prime.characteristic())
            }
        }
    }

    /// The residue field when the ring is local; `None` for `Z` and for composite moduli.
    pub fn residue_field(&self) -> Option<BaseRing> {
        let p = match self.prime {
            PrimeRing::Rationals => return Some(BaseRing::rationals()).map(|r| self.with_field_ext(r)),
            PrimeRing::Modular(n) => prime_power(n)?.0,
            PrimeRing::Integers => return None,
        };
        Some(self.with_field_ext(BaseRing::prime_field(p).ok()?))
    }

    fn with_field_ext(&self, residue_prime: BaseRing) -> BaseRing {
        match &self.ext {
            Some(e) if matches!(e.kind, ExtensionKind::Field { .. }) => BaseRing {
                prime: residue_prime.prime,
                ext: Some(e.clone()),
            },
            _ => residue_prime,
        }
    }
}

impl fmt::Display for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

/// Coefficients `c_0..c_{d-1}` of the smallest monic irreducible of degree `d` over `F_p`.
fn smallest_irreducible(p: u64, d: usize) -> Vec<u64> {
    let total = p.pow(d as u32);
    for code in 0..total {
        let mut coeffs = Vec::with_capacity(d);
        let mut c = code;
        for _ in 0..d {
            coeffs.push(c % p);
            c /= p;
        }
        if coeffs[0] == 0 {
            continue;
        }
        if is_irreducible(p, &coeffs) {
            return coeffs;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn is_irreducible(p: u64, lower: &[u64]) -> bool {
    // brute-force: no monic factor of degree 1..=d/2
    let d = lower.len();
    let mut f: Vec<u64> = lower.to_vec();
    f.push(1);
    for k in 1..=d / 2 {
        let count = p.pow(k as u32);
        for code in 0..count {
            let mut g = Vec::with_capacity(k + 1);
            let mut c = code;
            for _ in 0..k {
                g.push(c % p);
                c /= p;
            }
            g.push(1);
            if poly_rem_is_zero(p, &f, &g) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(p: u64, f: &[u64], g: &[u64]) -> bool {
    let mut r: Vec<u64> = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        for (i, gi) in g.iter().enumerate() {
            let sub = lead * gi % p;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r.pop();
    }
    r.iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_fast_paths_agree() {
        let vals: Vec<BigRational> = (-6i64..=6)
            .flat_map(|n| [1i64, 2, 3, 4, 9].map(move |d| BigRational::new(n.into(), d.into())))
            .collect();
        for x in &vals {
            for y in &vals {
                assert_eq!(rat_mul(x, y), x * y, "{x} * {y}");
                assert_eq!(rat_add(x, y), x + y, "{x} + {y}");
            }
        }
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(25), Some((5, 2)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn dual_number_arithmetic() {
        let f5 = BaseRing::prime_field(5).unwrap();
        let d = BaseRing::artinian(&f5, "eps", 2).unwrap();
        let eps = d.generator().unwrap();
        let a = d.add(&d.one(), &eps);
        let b = d.sub(&d.one(), &eps);
        assert!(d.is_one(&d.mul(&a, &b)));
        assert!(d.is_zero(&d.mul(&eps, &eps)));
        assert!(d.inv(&eps).is_none());
        assert_eq!(d.mul(&a, &d.inv(&a).unwrap()), d.one());
    }

    #[test]
    fn galois_field_inverse() {
        let f4 = BaseRing::galois_field(2, 2, "z").unwrap();
        let z = f4.generator().unwrap();
        let zi = f4.inv(&z).unwrap();
        assert!(f4.is_one(&f4.mul(&z, &zi)));
        // z^3 = 1 in GF(4)
        assert!(f4.is_one(&f4.pow(&z, 3)));
    }

    #[test]
    fn chain_division_mod_p_squared() {
        let r = PrimeRing::Modular(9);
        let a = Scalar::Mod(6);
        let b = Scalar::Mod(3);
        let c = r.chain_div(&a, &b);
        assert_eq!(r.mul(&b, &c), a);
        assert_eq!(r.valuation(&a), Some(1));
        assert_eq!(r.valuation(&Scalar::Mod(4)), Some(0));
    }

    #[test]
    fn residue_ring_characteristic_reduction() {
        let f3 = BaseRing::prime_field(3).unwrap();
        assert!(f3.is_zero(&f3.from_i64(3)));
        assert_eq!(f3.from_i64(-1), Scalar::Mod(2));
    }
}
