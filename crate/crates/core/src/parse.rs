//! Text syntax for base rings and algebra elements.
//!
//! Rings: `Z`, `Q`, `F_p`, `Z/n`, `GF(q)`, `GF(p^e)`, and an artinian
//! extension of any of the prime rings written `F_p[eps]/(eps^m)`.
//!
//! Elements: integers, `a/b` (division by an integer literal), variable names,
//! the ring extension symbol, `+ - * ^`, parentheses, and the postfix `@c`
//! selecting component `c` of a product algebra.

use std::sync::Arc;

use crate::algebra::{Element, NormalFormAlgebra};
use crate::error::{Error, Result};
use crate::ring::{is_prime, prime_power, BaseRing};

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(format!("col {}", self.pos + 1), msg)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        self.src[start..self.pos]
            .parse()
            .map_err(|_| Error::parse(format!("col {}", start + 1), "number too large"))
    }

    fn big_number(&mut self) -> Result<num_bigint::BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        Ok(self.src[start..self.pos].parse().expect("digits"))
    }

    /// A ring modulus; anything past 32 bits is refused before primality testing.
    fn modulus(&mut self) -> Result<u64> {
        let at = self.pos;
        let n = self.number()?;
        if n > u32::MAX as u64 {
            return Err(Error::parse(format!("col {}", at + 1), format!("modulus {n} is too large")));
        }
        Ok(n)
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        let mut first = true;
        while let Some(c) = self.peek() {
            let ok = if first { c.is_ascii_alphabetic() || c == '_' } else { c.is_ascii_alphanumeric() || c == '_' };
            if !ok {
                break;
            }
            self.pos += 1;
            first = false;
        }
        (start != self.pos).then(|| self.src[start..self.pos].to_string())
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }
}

/// Parses a base ring specification.
pub fn parse_ring(src: &str) -> Result<BaseRing> {
    let mut cur = Cursor::new(src);
    let ring = ring_expr(&mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(ring)
}

fn ring_expr(cur: &mut Cursor) -> Result<BaseRing> {
    let structural = |cur: &Cursor, e: Error| match e {
        Error::Structural(m) => cur.err(m),
        other => other,
    };
    let base = if cur.eat_str("GF") {
        cur.expect('(')?;
        let q = cur.modulus()?;
        let (p, e) = if cur.eat('^') {
            (q, cur.number()?)
        } else {
            let (p, e) = prime_power(q).ok_or_else(|| cur.err(format!("{q} is not a prime power")))?;
            (p, e as u64)
        };
        cur.expect(')')?;
        if !is_prime(p) {
            return Err(cur.err(format!("{p} is not prime")));
        }
        let e = u32::try_from(e).map_err(|_| cur.err("degree too large"))?;
        let mut sym = "z".to_string();
        if cur.eat('[') {
            sym = cur.ident().ok_or_else(|| cur.err("expected a generator name"))?;
            cur.expect(']')?;
        }
        return BaseRing::galois_field(p, e, &sym).map_err(|e| structural(cur, e));
    } else if cur.eat_str("F_") {
        let q = cur.modulus()?;
        if is_prime(q) {
            BaseRing::prime_field(q).map_err(|e| structural(cur, e))?
        } else if let Some((p, e)) = prime_power(q) {
            return BaseRing::galois_field(p, e, "z").map_err(|e| structural(cur, e));
        } else {
            return Err(cur.err(format!("{q} is not a prime power")));
        }
    } else if cur.eat('Z') {
        if cur.eat('/') {
            let n = cur.modulus()?;
            BaseRing::residue_ring(n).map_err(|e| structural(cur, e))?
        } else {
            BaseRing::integers()
        }
    } else if cur.eat('Q') {
        BaseRing::rationals()
    } else {
        return Err(cur.err("expected a ring (Z, Q, F_p, Z/n, GF(q))"));
    };
    if cur.eat('[') {
        let sym = cur.ident().ok_or_else(|| cur.err("expected a generator name"))?;
        cur.expect(']')?;
        cur.expect('/')?;
        cur.expect('(')?;
        let sym2 = cur.ident().ok_or_else(|| cur.err("expected the generator name"))?;
        if sym2 != sym {
            return Err(cur.err(format!("relation must be a power of `{sym}`")));
        }
        cur.expect('^')?;
        let m = cur.number()?;
        cur.expect(')')?;
        let m = u32::try_from(m).map_err(|_| cur.err("order too large"))?;
        if m > 64 {
            return Err(cur.err("nilpotency order too large"));
        }
        return BaseRing::artinian(&base, &sym, m).map_err(|e| structural(cur, e));
    }
    Ok(base)
}

/// Parses an element expression of `alg`.
pub fn parse_element(alg: &Arc<NormalFormAlgebra>, src: &str) -> Result<Element> {
    let mut cur = Cursor::new(src);
    let e = expr(alg, &mut cur, 0)?;
    if !cur.at_end() {
        return Err(cur.err("unexpected trailing input"));
    }
    Ok(e)
}

const MAX_DEPTH: usize = 128;

// Coefficient growth cap for `^` over Z and Q.
const MAX_POWER_BITS: u64 = 1 << 16;

fn expr(alg: &Arc<NormalFormAlgebra>, cur: &mut Cursor, depth: usize) -> Result<Element> {
    if depth > MAX_DEPTH {
        return Err(cur.err("expression nested too deeply"));
    }
    let mut acc = term(alg, cur, depth)?;
    loop {
        if cur.eat('+') {
            acc = &acc + &term(alg, cur, depth)?;
        } else if cur.eat('-') {
            acc = &acc - &term(alg, cur, depth)?;
        } else {
            return Ok(acc);
        }
    }
}

fn term(alg: &Arc<NormalFormAlgebra>, cur: &mut Cursor, depth: usize) -> Result<Element> {
    let mut acc = unary(alg, cur, depth)?;
    loop {
        if cur.eat('*') {
            acc = &acc * &unary(alg, cur, depth)?;
        } else if cur.eat('/') {
            let at = cur.pos;
            let d = cur.big_number()?;
            let base = alg.base();
            let inv = base
                .inv(&base.from_bigint(&d))
                .ok_or_else(|| Error::parse(format!("col {}", at + 1), format!("{d} is not invertible")))?;
            acc = acc.scale(&inv);
        } else {
            return Ok(acc);
        }
    }
}

fn unary(alg: &Arc<NormalFormAlgebra>, cur: &mut Cursor, depth: usize) -> Result<Element> {
    if cur.eat('-') {
        if depth > MAX_DEPTH {
            return Err(cur.err("expression nested too deeply"));
        }
        return Ok(-&unary(alg, cur, depth + 1)?);
    }
    let mut p = primary(alg, cur, depth)?;
    if cur.eat('^') {
        let e = cur.number()?;
        if e > 4096 {
            return Err(cur.err("exponent too large"));
        }
        let height = p.terms().map(|(_, c)| c.height_bits()).max().unwrap_or(0);
        if height.saturating_mul(e) > MAX_POWER_BITS {
            return Err(cur.err("power has too large coefficients"));
        }
        p = p.pow(e);
    }
    while cur.eat('@') {
        let c = cur.number()? as usize;
        if c >= alg.copies() {
            return Err(cur.err(format!("component {c} out of range")));
        }
        p = &p * &Element::idempotent(alg, c);
    }
    Ok(p)
}

fn primary(alg: &Arc<NormalFormAlgebra>, cur: &mut Cursor, depth: usize) -> Result<Element> {
    cur.skip_ws();
    match cur.peek() {
        Some('(') => {
            cur.pos += 1;
            let e = expr(alg, cur, depth + 1)?;
            cur.expect(')')?;
            Ok(e)
        }
        Some(c) if c.is_ascii_digit() => {
            let start = cur.pos;
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.pos += 1;
            }
            let n: num_bigint::BigInt = cur.src[start..cur.pos].parse().expect("digits");
            Ok(Element::from_scalar(alg, alg.base().from_bigint(&n)))
        }
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            let at = cur.pos;
            let name = cur.ident().expect("identifier");
            if let Ok(v) = Element::variable(alg, &name) {
                return Ok(v);
            }
            if let Some(ext) = alg.base().extension() {
                if ext.symbol == name {
                    return Ok(Element::from_scalar(alg, alg.base().generator().expect("extension")));
                }
            }
            Err(Error::parse(format!("col {}", at + 1), format!("unknown variable `{name}`")))
        }
        _ => Err(cur.err("expected a number, a variable or `(`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraBuilder;
    use crate::ring::RingKind;

    #[test]
    fn ring_specs() {
        assert_eq!(parse_ring("Z").unwrap().kind(), RingKind::Integers);
        assert_eq!(parse_ring("Q").unwrap().kind(), RingKind::Rationals);
        assert_eq!(parse_ring("F_7").unwrap().kind(), RingKind::PrimeField(7));
        assert_eq!(parse_ring("Z/9").unwrap().kind(), RingKind::ResidueRing(9));
        assert_eq!(parse_ring("GF(2^3)").unwrap().kind(), RingKind::GaloisField { p: 2, degree: 3 });
        assert_eq!(parse_ring("GF(9)").unwrap().kind(), RingKind::GaloisField { p: 3, degree: 2 });
        let d = parse_ring("F_5[eps]/(eps^3)").unwrap();
        assert_eq!(
            d.kind(),
            RingKind::ArtinianExtension { base: Box::new(RingKind::PrimeField(5)), order: 3 }
        );
        assert!(parse_ring("F_6").is_err());
        assert!(parse_ring("Z/1").is_err());
        assert!(matches!(parse_ring("F_5[e]/(f^2)"), Err(Error::Parse { .. })));
        for s in ["F_2000000000391191999", "GF(2000000000391191999^2)", "Z/99999999999", "GF(2^2919999919)"] {
            assert!(matches!(parse_ring(s), Err(Error::Parse { .. })), "{s}");
        }
        for s in ["Z", "Q", "F_7", "Z/9", "F_5[eps]/(eps^3)", "Q[e]/(e^2)"] {
            assert_eq!(parse_ring(&parse_ring(s).unwrap().spec()).unwrap(), parse_ring(s).unwrap());
        }
    }

    #[test]
    fn elements_round_trip() {
        let a = AlgebraBuilder::new(parse_ring("F_5[eps]/(eps^2)").unwrap())
            .var("x")
            .var("y")
            .relation(&[("x", 1), ("y", 1)])
            .truncation(Some(6))
            .build()
            .unwrap();
        let e = parse_element(&a, "(x + 2*y)^2 - eps*x/2 + 3").unwrap();
        assert_eq!(parse_element(&a, &e.to_string()).unwrap(), e);
        assert!(matches!(parse_element(&a, "x + z"), Err(Error::Parse { .. })));

        let q = AlgebraBuilder::new(parse_ring("Q").unwrap()).var("x").copies(2).build().unwrap();
        for s in ["(7/2)@0", "-3/6 + x", "22222222000000/0004000000000000000005/24795", "x - 1/2*x^2@1", "-x@1 + (2/3)@1"] {
            let e = parse_element(&q, s).unwrap();
            assert_eq!(parse_element(&q, &e.to_string()).unwrap(), e, "{s} -> {e}");
        }
        let e = parse_element(&q, "2222222220000000000000003714969^2926");
        assert!(matches!(e, Err(Error::Parse { .. })));
        assert!(parse_element(&q, "(1/3)^4096").unwrap().to_string().len() > 1000);
        assert_eq!(parse_element(&q, "1 - x").unwrap().to_string(), "1@0 - x@0 + 1@1 - x@1");
        assert!(matches!(parse_element(&a, "x +"), Err(Error::Parse { .. })));
    }

    #[test]
    fn product_components() {
        let a = AlgebraBuilder::new(parse_ring("F_3").unwrap())
            .var("s")
            .truncation(Some(4))
            .copies(2)
            .build()
            .unwrap();
        let e = parse_element(&a, "s@0 + 2*s^2@1 + 1@1").unwrap();
        assert_eq!(parse_element(&a, &e.to_string()).unwrap(), e);
        assert!(parse_element(&a, "s@2").is_err());
    }
}
