//! Deterministic construction of GF(p^n) with exact table arithmetic.
//!
//! Elements are represented by their code: the polynomial-basis coordinate
//! vector (a_0, …, a_{n−1}) packed as Σ a_i p^i. Code 0 is the additive
//! identity and code 1 the multiplicative identity. Multiplication,
//! division, inversion, powers and Frobenius maps go through log/antilog
//! tables; addition works digit-wise mod p.
//!
//! Construction is fully deterministic: the same [`FieldSpec`] always
//! yields the same modulus, generator and tables, byte for byte.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An element code in [0, q).
pub type Elem = u32;

/// Hard cap on q at construction time (table memory).
pub const MAX_Q: u64 = 1 << 20;

static NEXT_CTX_ID: AtomicU64 = AtomicU64::new(1);

/// What field to build: characteristic, degree, and an optional modulus.
///
/// The modulus, when given, is a monic degree-n polynomial over F_p as
/// n+1 coefficients, constant term first, leading coefficient 1. When
/// absent, [`build_field`] picks the first irreducible monic polynomial
/// in ascending encoding order of the non-leading coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldSpec {
    pub fn new(p: u32, n: u32) -> Self {
        FieldSpec { p, n, modulus: None }
    }

    /// Parse the three-line field spec file format:
    /// `p=<int>`, `n=<int>`, optional `modulus=<c0,c1,...,cn>`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = None;
        let mut n = None;
        let mut modulus = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {line:?}")))?;
            match key.trim() {
                "p" => {
                    p = Some(value.trim().parse::<u32>().map_err(|e| {
                        Error::Parse(format!("bad p: {e}"))
                    })?)
                }
                "n" => {
                    n = Some(value.trim().parse::<u32>().map_err(|e| {
                        Error::Parse(format!("bad n: {e}"))
                    })?)
                }
                "modulus" => {
                    let coeffs: std::result::Result<Vec<u32>, _> =
                        value.split(',').map(|c| c.trim().parse::<u32>()).collect();
                    modulus = Some(coeffs.map_err(|e| Error::Parse(format!("bad modulus: {e}")))?);
                }
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        let p = p.ok_or_else(|| Error::Parse("missing p".into()))?;
        let n = n.ok_or_else(|| Error::Parse("missing n".into()))?;
        Ok(FieldSpec { p, n, modulus })
    }
}

/// Frozen arithmetic context for GF(p^n).
///
/// Immutable after construction; safe for unrestricted concurrent reads.
#[derive(Debug)]
pub struct FieldCtx {
    id: u64,
    spec: FieldSpec,
    q: u32,
    generator: Elem,
    /// log[e] for e in 1..q; log[0] is a sentinel.
    log: Vec<u32>,
    /// exp[k] = generator^k for k in 0..q-1.
    exp: Vec<u32>,
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---- polynomial helpers over F_p (coefficient vectors, constant first) ----

fn poly_trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_mul_fp(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of a divided by monic b, both over F_p.
fn poly_rem_fp(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    debug_assert_eq!(*b.last().unwrap(), 1, "divisor must be monic");
    let mut r: Vec<u32> = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        for i in 0..b.len() {
            let idx = shift + i;
            let sub = (lead * b[i]) % p;
            r[idx] = (r[idx] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

/// Irreducibility over F_p by trial division against all monic
/// polynomials of degree 1..=deg/2.
fn is_irreducible_fp(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    if m[0] == 0 {
        return false; // divisible by x
    }
    for d in 1..=deg / 2 {
        // enumerate monic divisor candidates of degree d by encoding
        let count = (p as u64).pow(d as u32);
        for enc in 0..count {
            let mut cand = vec![0u32; d + 1];
            let mut e = enc;
            for c in cand.iter_mut().take(d) {
                *c = (e % p as u64) as u32;
                e /= p as u64;
            }
            cand[d] = 1;
            if poly_rem_fp(m, &cand, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// First irreducible monic degree-n polynomial over F_p, scanning the
/// non-leading coefficients in ascending packed-integer order.
fn default_modulus(p: u32, n: u32) -> Vec<u32> {
    let count = (p as u64).pow(n);
    for enc in 0..count {
        let mut m = vec![0u32; n as usize + 1];
        let mut e = enc;
        for c in m.iter_mut().take(n as usize) {
            *c = (e % p as u64) as u32;
            e /= p as u64;
        }
        m[n as usize] = 1;
        if is_irreducible_fp(&m, p) {
            return m;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists over F_p")
}

fn decode(code: Elem, p: u32, n: u32) -> Vec<u32> {
    let mut digits = vec![0u32; n as usize];
    let mut c = code;
    for d in digits.iter_mut() {
        *d = c % p;
        c /= p;
    }
    digits
}

fn encode(digits: &[u32], p: u32, n: u32) -> Elem {
    let mut code = 0u32;
    for i in (0..n as usize).rev() {
        code = code * p + digits.get(i).copied().unwrap_or(0);
    }
    code
}

/// Multiply two element codes the slow way: polynomial product reduced by
/// the modulus. Used only during construction and as an internal oracle.
fn slow_mul(a: Elem, b: Elem, p: u32, n: u32, modulus: &[u32]) -> Elem {
    let pa = decode(a, p, n);
    let pb = decode(b, p, n);
    let prod = poly_mul_fp(&pa, &pb, p);
    let rem = poly_rem_fp(&prod, modulus, p);
    encode(&rem, p, n)
}

/// Build a frozen [`FieldCtx`] from a spec.
///
/// Deterministic: the default modulus is the first irreducible in scan
/// order, and the generator is the smallest nonzero code of full order.
///
/// ```
/// use dirlab::field::{build_field, FieldSpec};
///
/// let f9 = build_field(FieldSpec::new(3, 2))?;
/// assert_eq!(f9.q(), 9);
/// assert_eq!(f9.modulus(), &[1, 0, 1]); // x² + 1
/// assert_eq!(f9.mul(3, 3), 2);          // x·x = −1
/// assert_eq!(f9.frobenius(5, 1)?, 8);   // (2+x)³ = 2+2x
/// # Ok::<(), dirlab::Error>(())
/// ```
pub fn build_field(spec: FieldSpec) -> Result<Arc<FieldCtx>> {
    if !is_prime(spec.p) {
        return Err(Error::NonPrimeCharacteristic(spec.p));
    }
    if spec.n == 0 {
        return Err(Error::DegreeMismatch);
    }
    let q64 = (spec.p as u64)
        .checked_pow(spec.n)
        .ok_or(Error::FieldTooLarge(u64::MAX))?;
    if q64 > MAX_Q {
        return Err(Error::FieldTooLarge(q64));
    }
    let q = q64 as u32;
    let p = spec.p;
    let n = spec.n;

    let modulus = match &spec.modulus {
        Some(m) => {
            if m.len() != n as usize + 1
                || *m.last().unwrap() != 1
                || m.iter().any(|&c| c >= p)
            {
                return Err(Error::DegreeMismatch);
            }
            if !is_irreducible_fp(m, p) {
                return Err(Error::ReducibleModulus);
            }
            m.clone()
        }
        None => default_modulus(p, n),
    };

    // Smallest nonzero code of multiplicative order q-1; record its power
    // sequence as the antilog table.
    let order = q - 1;
    let mut generator = 0;
    let mut exp = Vec::with_capacity(order as usize);
    'cand: for g in 1..q {
        exp.clear();
        let mut acc: Elem = 1;
        for _ in 0..order {
            exp.push(acc);
            acc = slow_mul(acc, g, p, n, &modulus);
            if acc == 1 {
                break;
            }
        }
        if exp.len() == order as usize && acc == 1 {
            generator = g;
            break 'cand;
        }
    }
    debug_assert!(generator != 0 || q == 2);
    if q == 2 {
        generator = 1;
        exp = vec![1];
    }

    let mut log = vec![u32::MAX; q as usize];
    for (k, &e) in exp.iter().enumerate() {
        log[e as usize] = k as u32;
    }

    let resolved = FieldSpec { p, n, modulus: Some(modulus) };
    Ok(Arc::new(FieldCtx {
        id: NEXT_CTX_ID.fetch_add(1, Ordering::Relaxed),
        spec: resolved,
        q,
        generator,
        log,
        exp,
    }))
}

impl FieldCtx {
    /// Identity token; distinct per constructed context.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn p(&self) -> u32 {
        self.spec.p
    }

    pub fn n(&self) -> u32 {
        self.spec.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// The resolved spec, modulus always present.
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn modulus(&self) -> &[u32] {
        self.spec.modulus.as_deref().unwrap()
    }

    pub fn generator(&self) -> Elem {
        self.generator
    }

    /// Discrete log of a nonzero element w.r.t. the generator.
    pub fn log(&self, e: Elem) -> Result<u32> {
        if e == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(self.log[e as usize])
    }

    /// generator^k for 0 ≤ k < q−1.
    pub fn antilog(&self, k: u32) -> Elem {
        self.exp[(k % (self.q - 1)) as usize]
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.spec.p;
        let mut out = 0u32;
        let mut mult = 1u32;
        let (mut a, mut b) = (a, b);
        while a != 0 || b != 0 {
            out += ((a % p + b % p) % p) * mult;
            a /= p;
            b /= p;
            mult *= p;
        }
        out
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.spec.p;
        let mut out = 0u32;
        let mut mult = 1u32;
        let mut a = a;
        while a != 0 {
            out += ((p - a % p) % p) * mult;
            a /= p;
            mult *= p;
        }
        out
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let m = self.q - 1;
        let k = self.log[a as usize] + self.log[b as usize];
        self.exp[(k % m) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let m = self.q - 1;
        let k = (m - self.log[a as usize]) % m;
        Ok(self.exp[k as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// a^k for any integer k; negative k requires a ≠ 0.
    pub fn pow(&self, a: Elem, k: i64) -> Result<Elem> {
        let m = (self.q - 1) as i64;
        if a == 0 {
            return match k.cmp(&0) {
                std::cmp::Ordering::Greater => Ok(0),
                std::cmp::Ordering::Equal => Ok(1),
                std::cmp::Ordering::Less => Err(Error::DivisionByZero),
            };
        }
        let e = ((self.log[a as usize] as i64 * (k % m)) % m + m) % m;
        Ok(self.exp[e as usize])
    }

    /// e^{p^j}, the j-th power of the Frobenius automorphism.
    pub fn frobenius(&self, e: Elem, j: u32) -> Result<Elem> {
        if j >= self.spec.n {
            return Err(Error::JOutOfRange { j, n: self.spec.n });
        }
        if e == 0 {
            return Ok(0);
        }
        let m = (self.q - 1) as u64;
        let pj = (self.spec.p as u64).pow(j) % m;
        let k = (self.log[e as usize] as u64 * pj) % m;
        Ok(self.exp[k as usize])
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, e: Elem) -> Result<u32> {
        let m = self.q - 1;
        let k = self.log(e)?;
        let g = gcd(k, m);
        Ok(m / g)
    }
}

pub(crate) fn gcd(a: u32, b: u32) -> u32 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn divisors(m: u32) -> Vec<u32> {
    let mut out: Vec<u32> = (1..=m).filter(|d| m % d == 0).collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_modulus_matches_scan_oracle() {
        // Independent oracle: for n <= 3 irreducible <=> no roots in F_p.
        let scan = |p: u32, n: u32| -> Vec<u32> {
            let count = (p as u64).pow(n);
            'outer: for enc in 0..count {
                let mut m = vec![0u32; n as usize + 1];
                let mut e = enc;
                for c in m.iter_mut().take(n as usize) {
                    *c = (e % p as u64) as u32;
                    e /= p as u64;
                }
                m[n as usize] = 1;
                for r in 0..p {
                    let mut v = 0u64;
                    for &c in m.iter().rev() {
                        v = (v * r as u64 + c as u64) % p as u64;
                    }
                    if v == 0 {
                        continue 'outer;
                    }
                }
                return m;
            }
            unreachable!()
        };
        assert_eq!(scan(3, 2), vec![1, 0, 1]); // x^2 + 1
        assert_eq!(scan(2, 3), vec![1, 1, 0, 1]); // x^3 + x + 1
        let f9 = build_field(FieldSpec::new(3, 2)).unwrap();
        assert_eq!(f9.modulus(), &[1, 0, 1]);
        let f8 = build_field(FieldSpec::new(2, 3)).unwrap();
        assert_eq!(f8.modulus(), &[1, 1, 0, 1]);
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert!(matches!(
            build_field(FieldSpec::new(4, 1)),
            Err(Error::NonPrimeCharacteristic(4))
        ));
    }

    #[test]
    fn bad_modulus_rejected() {
        let mut spec = FieldSpec::new(3, 2);
        spec.modulus = Some(vec![0, 0, 1]); // x^2, reducible
        assert!(matches!(build_field(spec), Err(Error::ReducibleModulus)));
        let mut spec = FieldSpec::new(3, 2);
        spec.modulus = Some(vec![1, 1]); // wrong degree
        assert!(matches!(build_field(spec), Err(Error::DegreeMismatch)));
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            build_field(FieldSpec::new(2, 21)),
            Err(Error::FieldTooLarge(_))
        ));
    }

    #[test]
    fn arith_examples() {
        let f5 = build_field(FieldSpec::new(5, 1)).unwrap();
        assert_eq!(f5.mul(2, 4), 3);
        let f9 = build_field(FieldSpec::new(3, 2)).unwrap();
        assert_eq!(f9.mul(3, 3), 2); // x*x = -1 = 2 mod x^2+1
        let f7 = build_field(FieldSpec::new(7, 1)).unwrap();
        assert_eq!(f7.inv(3).unwrap(), 5);
        assert!(f7.inv(0).is_err());
        assert!(f7.div(1, 0).is_err());
    }

    #[test]
    fn mul_matches_slow_polynomial_oracle() {
        for (p, n) in [(3u32, 2u32), (2, 3), (5, 2)] {
            let ctx = build_field(FieldSpec::new(p, n)).unwrap();
            let m = ctx.modulus().to_vec();
            for a in 0..ctx.q() {
                for b in 0..ctx.q() {
                    assert_eq!(ctx.mul(a, b), slow_mul(a, b, p, n, &m));
                }
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let f9 = build_field(FieldSpec::new(3, 2)).unwrap();
        // (2+x)^3 = 2+2x, code 8; cross-check by repeated squaring.
        let e = 5;
        let cube = f9.mul(f9.mul(e, e), e);
        assert_eq!(cube, 8);
        assert_eq!(f9.frobenius(e, 1).unwrap(), cube);
        assert_eq!(f9.frobenius(e, 0).unwrap(), e);
        assert!(f9.frobenius(e, 2).is_err());

        let f8 = build_field(FieldSpec::new(2, 3)).unwrap();
        for e in 0..8 {
            let twice = f8.frobenius(f8.frobenius(e, 1).unwrap(), 1).unwrap();
            assert_eq!(twice, f8.frobenius(e, 2).unwrap());
        }
    }

    #[test]
    fn frobenius_additivity_exhaustive() {
        for (p, n) in [(2u32, 6u32), (3, 3), (7, 2), (61, 1)] {
            let ctx = build_field(FieldSpec::new(p, n)).unwrap();
            for j in 0..n {
                for x in 0..ctx.q() {
                    for y in 0..ctx.q() {
                        let lhs = ctx.frobenius(ctx.add(x, y), j).unwrap();
                        let rhs =
                            ctx.add(ctx.frobenius(x, j).unwrap(), ctx.frobenius(y, j).unwrap());
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn log_antilog_consistency() {
        let ctx = build_field(FieldSpec::new(3, 3)).unwrap();
        let m = ctx.q() - 1;
        for e in 1..ctx.q() {
            assert_eq!(ctx.antilog(ctx.log(e).unwrap()), e);
        }
        for k in 0..m {
            assert_eq!(ctx.log(ctx.antilog(k)).unwrap(), k);
        }
        for k in 0..m {
            for l in 0..m {
                assert_eq!(
                    ctx.mul(ctx.antilog(k), ctx.antilog(l)),
                    ctx.antilog((k + l) % m)
                );
            }
        }
    }

    #[test]
    fn field_axioms_spot_checks() {
        let ctx = build_field(FieldSpec::new(5, 2)).unwrap();
        for e in 0..ctx.q() {
            assert_eq!(ctx.add(e, ctx.neg(e)), 0);
            if e != 0 {
                assert_eq!(ctx.mul(e, ctx.inv(e).unwrap()), 1);
            }
        }
        assert_eq!(ctx.pow(0, 0).unwrap(), 1);
        assert_eq!(ctx.pow(0, 5).unwrap(), 0);
        assert!(ctx.pow(0, -1).is_err());
        let g = ctx.generator();
        assert_eq!(ctx.pow(g, -1).unwrap(), ctx.inv(g).unwrap());
    }

    #[test]
    fn deterministic_construction() {
        let a = build_field(FieldSpec::new(2, 4)).unwrap();
        let b = build_field(FieldSpec::new(2, 4)).unwrap();
        assert_eq!(a.spec(), b.spec());
        assert_eq!(a.generator(), b.generator());
        assert_eq!(a.exp, b.exp);
        assert_eq!(a.log, b.log);
        assert_ne!(a.id(), b.id());
    }

    #[test]
    fn spec_file_parsing() {
        let spec = FieldSpec::parse("p=3\nn=2\nmodulus=1,0,1\n").unwrap();
        assert_eq!(spec, FieldSpec { p: 3, n: 2, modulus: Some(vec![1, 0, 1]) });
        let spec = FieldSpec::parse("p=7\nn=1\n").unwrap();
        assert_eq!(spec, FieldSpec::new(7, 1));
        assert!(FieldSpec::parse("p=7").is_err());
        assert!(FieldSpec::parse("p=7\nn=x").is_err());
    }
}
