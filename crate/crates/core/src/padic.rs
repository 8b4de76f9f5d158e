//! Fixed-prime p-adic numbers with tracked absolute precision.
//!
//! A nonzero value is `p^v * u + O(p^n_abs)` with `u` a unit stored as an
//! integer in `[0, p^(n_abs - v))`. Zero comes in two flavours: the exact
//! zero, which absorbs everything, and `O(p^n)`, a zero known only to `n`
//! digits.

use std::cell::RefCell;
use std::cmp::{max, min};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Precision marker for exact zero.
pub const INF: i64 = i64::MAX;

thread_local! {
    static POWERS: RefCell<(u64, Vec<BigInt>)> = RefCell::new((0, Vec::new()));
}

/// Runs `f` with `p^k` borrowed from a per-thread table.
pub fn with_pow<R>(p: u64, k: u32, f: impl FnOnce(&BigInt) -> R) -> R {
    POWERS.with(|cell| {
        let mut t = cell.borrow_mut();
        if t.0 != p {
            t.0 = p;
            t.1 = vec![BigInt::one()];
        }
        while t.1.len() <= k as usize {
            let next = t.1.last().unwrap() * p;
            t.1.push(next);
        }
        f(&t.1[k as usize])
    })
}

pub fn pow_big(p: u64, k: u32) -> BigInt {
    with_pow(p, k, |m| m.clone())
}

fn reduce(x: &BigInt, p: u64, k: i64) -> BigInt {
    if k <= 0 {
        return BigInt::zero();
    }
    with_pow(p, k as u32, |m| x.mod_floor(m))
}

/// `v_p(n)` for a nonzero integer.
pub fn val_int(p: u64, n: &BigInt) -> i64 {
    if n.is_zero() {
        return INF;
    }
    let mut v = 0;
    let mut m = n.abs();
    let pb = BigInt::from(p);
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub fn val_u64(p: u64, mut n: u64) -> i64 {
    if n == 0 {
        return INF;
    }
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Largest `k` with `p^k <= n`, for `n >= 1`.
pub fn floor_log(p: u64, n: u64) -> i64 {
    let mut k = 0;
    let mut m = n;
    while m >= p {
        m /= p;
        k += 1;
    }
    k
}

/// Legendre: `v_p(n!) = (n - s_p(n)) / (p - 1)`.
pub fn legendre(p: u64, n: u64) -> i64 {
    let mut s = 0u64;
    let mut m = n;
    while m > 0 {
        s += m % p;
        m /= p;
    }
    ((n - s) / (p - 1)) as i64
}

/// `min_{j >= r} (j - v_p(j!))`, the valuation cut out by the r-th
/// divided-power ideal of `p Z_p`.
pub fn dp_ideal_valuation(r: u64, p: u64) -> i64 {
    if r == 0 {
        return 0;
    }
    let mut best = i64::MAX;
    let mut j = r;
    loop {
        let val = j as i64 - legendre(p, j);
        best = min(best, val);
        // j - v_p(j!) >= (j (p-2) + 1) / (p-1)
        let lower = (j as i64 * (p as i64 - 2) + 1) as f64 / (p as i64 - 1) as f64;
        if lower >= best as f64 {
            return best;
        }
        j += 1;
    }
}

#[derive(Clone, Debug)]
pub struct PAdic {
    p: u64,
    v: i64,
    u: BigInt,
    n_abs: i64,
}

impl PAdic {
    fn build(p: u64, v0: i64, s: BigInt, n_abs: i64) -> PAdic {
        if n_abs <= v0 {
            return PAdic::zero_to(p, n_abs);
        }
        let mut s = reduce(&s, p, n_abs - v0);
        if s.is_zero() {
            return PAdic::zero_to(p, n_abs);
        }
        let mut v = v0;
        let pb = BigInt::from(p);
        loop {
            let (q, r) = s.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            s = q;
            v += 1;
        }
        PAdic { p, v, u: s, n_abs }
    }

    /// `p^v * u + O(p^n_abs)`; `u` may be any integer.
    pub fn new(p: u64, v: i64, u: BigInt, n_abs: i64) -> PAdic {
        assert!(p >= 2, "prime must be at least 2");
        PAdic::build(p, v, u, n_abs)
    }

    pub fn from_int<T: Into<BigInt>>(p: u64, n: T, n_abs: i64) -> PAdic {
        PAdic::new(p, 0, n.into(), n_abs)
    }

    pub fn from_i64(p: u64, n: i64, n_abs: i64) -> PAdic {
        PAdic::from_int(p, n, n_abs)
    }

    pub fn from_ratio(p: u64, num: i64, den: i64, n_abs: i64) -> Result<PAdic> {
        PAdic::from_rational(p, &BigRational::new(num.into(), den.into()), n_abs)
    }

    pub fn from_rational(p: u64, q: &BigRational, n_abs: i64) -> Result<PAdic> {
        if q.is_zero() {
            return Ok(PAdic::zero(p));
        }
        let num = q.numer().clone();
        let den = q.denom().clone();
        let vd = val_int(p, &den);
        let pd = pow_big(p, vd as u32);
        let den_unit = &den / &pd;
        let vn = val_int(p, &num);
        let v = vn - vd;
        let rel = n_abs - v;
        if rel <= 0 {
            return Ok(PAdic::zero_to(p, n_abs));
        }
        let num_unit = &num / pow_big(p, vn as u32);
        let inv = inverse_mod(&den_unit, p, rel)?;
        Ok(PAdic::build(p, v, num_unit * inv, n_abs))
    }

    pub fn zero(p: u64) -> PAdic {
        PAdic { p, v: INF, u: BigInt::zero(), n_abs: INF }
    }

    pub fn zero_to(p: u64, n_abs: i64) -> PAdic {
        PAdic { p, v: n_abs, u: BigInt::zero(), n_abs }
    }

    pub fn one(p: u64, n_abs: i64) -> PAdic {
        PAdic::from_i64(p, 1, n_abs)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Valuation; for `O(p^n)` this is `n`, for exact zero [`INF`].
    pub fn valuation(&self) -> i64 {
        self.v
    }

    pub fn unit(&self) -> &BigInt {
        &self.u
    }

    pub fn n_abs(&self) -> i64 {
        self.n_abs
    }

    pub fn rel_prec(&self) -> i64 {
        if self.is_zero() {
            0
        } else {
            self.n_abs - self.v
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.n_abs == INF
    }

    /// True for exact zero and for `O(p^n)`.
    pub fn is_zero(&self) -> bool {
        self.u.is_zero()
    }

    fn check(&self, other: &PAdic) -> Result<()> {
        if self.p != other.p {
            Err(Error::PrimeMismatch(self.p, other.p))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &PAdic) -> Result<PAdic> {
        self.check(other)?;
        if self.is_exact_zero() {
            return Ok(other.clone());
        }
        if other.is_exact_zero() {
            return Ok(self.clone());
        }
        let n = min(self.n_abs, other.n_abs);
        let v0 = min(self.v, other.v);
        if v0 >= n {
            return Ok(PAdic::zero_to(self.p, n));
        }
        let shift = |x: &PAdic| -> BigInt {
            if x.u.is_zero() || x.v >= n {
                BigInt::zero()
            } else {
                with_pow(x.p, (x.v - v0) as u32, |m| &x.u * m)
            }
        };
        Ok(PAdic::build(self.p, v0, shift(self) + shift(other), n))
    }

    pub fn checked_sub(&self, other: &PAdic) -> Result<PAdic> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &PAdic) -> Result<PAdic> {
        self.check(other)?;
        if self.is_exact_zero() || other.is_exact_zero() {
            return Ok(PAdic::zero(self.p));
        }
        let n = min(self.n_abs.saturating_add(other.v), other.n_abs.saturating_add(self.v));
        let v = self.v + other.v;
        if self.is_zero() || other.is_zero() || v >= n {
            return Ok(PAdic::zero_to(self.p, n));
        }
        let u = reduce(&(&self.u * &other.u), self.p, n - v);
        Ok(PAdic { p: self.p, v, u, n_abs: n })
    }

    pub fn div(&self, other: &PAdic) -> Result<PAdic> {
        self.check(other)?;
        if other.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if other.is_zero() {
            return Err(Error::PrecisionExhausted("division by a zero known only to finite precision".into()));
        }
        if self.is_exact_zero() {
            return Ok(PAdic::zero(self.p));
        }
        if self.is_zero() {
            return Ok(PAdic::zero_to(self.p, self.n_abs - other.v));
        }
        let rel = min(self.rel_prec(), other.rel_prec());
        let v = self.v - other.v;
        let inv = inverse_mod(&other.u, self.p, rel)?;
        let u = reduce(&(&self.u * inv), self.p, rel);
        Ok(PAdic { p: self.p, v, u, n_abs: v + rel })
    }

    pub fn inv(&self) -> Result<PAdic> {
        if self.is_exact_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Err(Error::PrecisionExhausted("inverse of a zero known only to finite precision".into()));
        }
        let rel = self.rel_prec();
        let u = inverse_mod(&self.u, self.p, rel)?;
        Ok(PAdic { p: self.p, v: -self.v, u, n_abs: rel - self.v })
    }

    /// `self^e` for `e >= 1`; `e = 0` gives one at the relative precision of `self`.
    pub fn pow(&self, e: u32) -> PAdic {
        if e == 0 {
            return PAdic::one(self.p, max(self.rel_prec(), 1));
        }
        let mut acc: Option<PAdic> = None;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => &a * &base,
                });
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc.unwrap()
    }

    /// Multiplication by an exact integer.
    pub fn scale_int(&self, k: i64) -> PAdic {
        self.scale_big(&BigInt::from(k))
    }

    pub fn scale_big(&self, k: &BigInt) -> PAdic {
        if self.is_exact_zero() {
            return self.clone();
        }
        if k.is_zero() {
            return PAdic::zero(self.p);
        }
        let vk = val_int(self.p, k);
        if self.is_zero() {
            return PAdic::zero_to(self.p, self.n_abs + vk);
        }
        let ku = k / pow_big(self.p, vk as u32);
        PAdic::build(self.p, self.v + vk, &self.u * ku, self.n_abs + vk)
    }

    /// Division by a nonzero exact integer.
    pub fn div_int(&self, k: i64) -> PAdic {
        assert!(k != 0, "division by zero integer");
        if self.is_exact_zero() {
            return self.clone();
        }
        let vk = val_u64(self.p, k.unsigned_abs());
        if self.is_zero() {
            return PAdic::zero_to(self.p, self.n_abs - vk);
        }
        let rel = self.rel_prec();
        let ku = BigInt::from(k) / pow_big(self.p, vk as u32);
        let inv = inverse_mod(&ku, self.p, rel).expect("unit");
        PAdic::build(self.p, self.v - vk, &self.u * inv, self.n_abs - vk)
    }

    /// Multiplies by `p^k` (`k` may be negative).
    pub fn shift(&self, k: i64) -> PAdic {
        if self.is_exact_zero() {
            return self.clone();
        }
        PAdic { p: self.p, v: self.v + k, u: self.u.clone(), n_abs: self.n_abs + k }
    }

    /// Lowers the absolute precision to at most `n`.
    pub fn truncate(&self, n: i64) -> PAdic {
        if n >= self.n_abs {
            return self.clone();
        }
        if self.v >= n {
            return PAdic::zero_to(self.p, n);
        }
        PAdic::build(self.p, self.v, self.u.clone(), n)
    }

    /// Number of leading digits on which `self` and `other` provably agree.
    pub fn agreement(&self, other: &PAdic) -> i64 {
        match self.checked_sub(other) {
            Ok(d) => d.valuation(),
            Err(_) => i64::MIN,
        }
    }

    /// Integer representative in `[0, p^n_abs)` when `v >= 0`.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.v < 0 || self.is_exact_zero() {
            return if self.is_exact_zero() { Some(BigInt::zero()) } else { None };
        }
        Some(with_pow(self.p, self.v as u32, |m| &self.u * m))
    }

    /// Signed representative in `(-p^n/2, p^n/2]`, handy for printing small rationals.
    pub fn to_symmetric(&self) -> Option<BigInt> {
        let x = self.to_integer()?;
        if self.is_exact_zero() {
            return Some(x);
        }
        let m = pow_big(self.p, self.n_abs as u32);
        Some(if &x * 2 > m { x - m } else { x })
    }

    /// Reduction mod p of a unit.
    pub fn residue(&self) -> Option<u64> {
        if self.v != 0 {
            return None;
        }
        (&self.u % self.p).to_u64()
    }
}

fn inverse_mod(a: &BigInt, p: u64, k: i64) -> Result<BigInt> {
    if k <= 0 {
        return Ok(BigInt::zero());
    }
    with_pow(p, k as u32, |m| {
        let g = a.extended_gcd(m);
        if !g.gcd.is_one() {
            return Err(Error::InvalidInput("not a unit".into()));
        }
        Ok(g.x.mod_floor(m))
    })
}

impl PartialEq for PAdic {
    /// Structural equality: same digits and same precision.
    fn eq(&self, other: &PAdic) -> bool {
        self.p == other.p && self.v == other.v && self.n_abs == other.n_abs && self.u == other.u
    }
}

impl<'a> Add<&'a PAdic> for &'a PAdic {
    type Output = PAdic;
    fn add(self, rhs: &PAdic) -> PAdic {
        self.checked_add(rhs).expect("prime mismatch")
    }
}

impl<'a> Sub<&'a PAdic> for &'a PAdic {
    type Output = PAdic;
    fn sub(self, rhs: &PAdic) -> PAdic {
        self.checked_sub(rhs).expect("prime mismatch")
    }
}

impl<'a> Mul<&'a PAdic> for &'a PAdic {
    type Output = PAdic;
    fn mul(self, rhs: &PAdic) -> PAdic {
        self.checked_mul(rhs).expect("prime mismatch")
    }
}

impl Neg for &PAdic {
    type Output = PAdic;
    fn neg(self) -> PAdic {
        if self.u.is_zero() {
            return self.clone();
        }
        let m = pow_big(self.p, (self.n_abs - self.v) as u32);
        PAdic { p: self.p, v: self.v, u: m - &self.u, n_abs: self.n_abs }
    }
}

impl Neg for PAdic {
    type Output = PAdic;
    fn neg(self) -> PAdic {
        -&self
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact_zero() {
            return write!(f, "0");
        }
        if self.is_zero() {
            return write!(f, "O({}^{})", self.p, self.n_abs);
        }
        let head = if self.v == 0 {
            format!("{}", self.u)
        } else {
            format!("{}*{}^{}", self.u, self.p, self.v)
        };
        write!(f, "{} + O({}^{})", head, self.p, self.n_abs)
    }
}

#[derive(Serialize, Deserialize)]
struct Repr {
    p: String,
    v: String,
    u: String,
    n_abs: String,
}

impl Serialize for PAdic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let inf = |x: i64| if x == INF { "inf".to_string() } else { x.to_string() };
        Repr { p: self.p.to_string(), v: inf(self.v), u: self.u.to_string(), n_abs: inf(self.n_abs) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<PAdic, D::Error> {
        use serde::de::Error as _;
        let r = Repr::deserialize(d)?;
        let p: u64 = r.p.parse().map_err(D::Error::custom)?;
        if p < 2 {
            return Err(D::Error::custom("prime must be at least 2"));
        }
        let parse = |s: &str| -> std::result::Result<i64, D::Error> {
            if s == "inf" { Ok(INF) } else { s.parse().map_err(D::Error::custom) }
        };
        let n_abs = parse(&r.n_abs)?;
        if n_abs == INF {
            return Ok(PAdic::zero(p));
        }
        let v = parse(&r.v)?;
        let u: BigInt = r.u.parse().map_err(D::Error::custom)?;
        if u.sign() == Sign::Minus {
            return Err(D::Error::custom("negative unit"));
        }
        Ok(PAdic::new(p, v, u, n_abs))
    }
}

/// Teichmuller representative of `c mod p`, to `n` digits.
pub fn teichmuller(c: i64, p: u64, n: i64) -> Result<PAdic> {
    let c = c.rem_euclid(p as i64);
    if c == 0 {
        return Err(Error::InvalidInput("residue 0 has no Teichmuller unit".into()));
    }
    if n <= 0 {
        return Ok(PAdic::zero_to(p, n));
    }
    // x <- x^p converges one digit per step; cheap enough for the precisions used here
    let m = pow_big(p, n as u32);
    let mut x = BigInt::from(c);
    for _ in 0..n {
        x = x.modpow(&BigInt::from(p), &m);
    }
    Ok(PAdic::from_int(p, x, n))
}

/// `log(1 + h)` by its power series, for `v(h) >= 1` (`>= 2` when `p = 2`).
pub fn log_one_plus(h: &PAdic) -> Result<PAdic> {
    let p = h.p;
    if h.is_exact_zero() {
        return Ok(PAdic::zero(p));
    }
    let need = if p == 2 { 2 } else { 1 };
    if h.valuation() < need {
        return Err(Error::NotAUnitNearOne);
    }
    let n_target = h.n_abs;
    if h.is_zero() {
        return Ok(PAdic::zero_to(p, n_target));
    }
    let vh = h.valuation();
    let mut acc = PAdic::zero(p);
    let mut pw = h.clone();
    let mut n: u64 = 1;
    loop {
        if n as i64 * vh - floor_log(p, n) >= n_target && n > 1 {
            break;
        }
        let term = pw.div_int(n as i64);
        acc = if n % 2 == 1 { &acc + &term } else { &acc - &term };
        pw = &pw * h;
        n += 1;
    }
    Ok(acc.truncate(n_target))
}

/// Iwasawa-style log with branch `log(p) = a`.
pub fn padic_log(x: &PAdic, a: &PAdic) -> Result<PAdic> {
    x.check(a)?;
    let p = x.p;
    if x.is_exact_zero() {
        return Err(Error::InvalidInput("log of zero".into()));
    }
    if x.is_zero() {
        return Err(Error::PrecisionExhausted("log of a value with no significant digits".into()));
    }
    let rel = x.rel_prec();
    let u = PAdic { p, v: 0, u: x.u.clone(), n_abs: rel };
    let c = teichmuller((&x.u % p).to_i64().unwrap(), p, rel)?;
    let g = u.div(&c)?;
    let lg = if p == 2 {
        let g2 = &g * &g;
        let h = &g2 - &PAdic::one(p, g2.n_abs());
        log_one_plus(&h)?.div_int(2).truncate(rel)
    } else {
        log_one_plus(&(&g - &PAdic::one(p, rel)))?
    };
    if x.v == 0 {
        Ok(lg)
    } else {
        Ok(&lg + &a.scale_int(x.v))
    }
}

/// Power-series exponential, for `v(x) > 1/(p-1)`.
pub fn padic_exp(x: &PAdic) -> Result<PAdic> {
    let p = x.p;
    if x.is_exact_zero() {
        return Err(Error::InvalidInput("exp of exact zero has no finite precision".into()));
    }
    let vx = x.valuation();
    if (vx as f64) <= 1.0 / (p as f64 - 1.0) {
        return Err(Error::InvalidInput("exp does not converge".into()));
    }
    let n_target = x.n_abs;
    let mut acc = PAdic::one(p, n_target);
    let mut term = x.clone();
    let mut n: u64 = 1;
    loop {
        acc = &acc + &term;
        // v(x^k/k!) >= k (v - 1/(p-1))
        let lower = (n + 1) as f64 * (vx as f64 - 1.0 / (p as f64 - 1.0));
        if lower >= n_target as f64 {
            break;
        }
        n += 1;
        term = (&term * x).div_int(n as i64);
    }
    Ok(acc.truncate(n_target))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u64, n: i64, d: i64, prec: i64) -> PAdic {
        PAdic::from_ratio(p, n, d, prec).unwrap()
    }

    #[test]
    fn inverse_of_one_minus_p() {
        let one = PAdic::one(5, 4);
        let x = PAdic::from_i64(5, 1 - 5, 4);
        let y = one.div(&x).unwrap();
        assert_eq!(y.to_integer().unwrap(), BigInt::from(156));
        assert_eq!(y.n_abs(), 4);
    }

    #[test]
    fn teichmuller_two_mod_25() {
        let t = teichmuller(2, 5, 2).unwrap();
        assert_eq!(t.to_integer().unwrap(), BigInt::from(7));
        let t4 = teichmuller(2, 5, 10).unwrap();
        assert!(t4.pow(4).agreement(&PAdic::one(5, 10)) >= 10);
    }

    #[test]
    fn dp_valuations() {
        assert_eq!(dp_ideal_valuation(3, 5), 3);
        assert_eq!(dp_ideal_valuation(5, 2), 1);
        assert_eq!(dp_ideal_valuation(4, 3), 3);
        assert_eq!(dp_ideal_valuation(5, 5), 4);
        assert_eq!(dp_ideal_valuation(0, 7), 0);
    }

    #[test]
    fn cancellation_keeps_precision() {
        let a = PAdic::one(5, 6);
        let b = PAdic::from_i64(5, -1, 6);
        let s = &a + &b;
        assert!(s.is_zero() && !s.is_exact_zero());
        assert_eq!(s.n_abs(), 6);
    }

    #[test]
    fn division_by_zero_flavours() {
        let a = PAdic::one(3, 5);
        assert_eq!(a.div(&PAdic::zero(3)), Err(Error::DivisionByZero));
        assert!(matches!(a.div(&PAdic::zero_to(3, 4)), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn prime_mismatch() {
        let a = PAdic::one(3, 5);
        let b = PAdic::one(5, 5);
        assert_eq!(a.checked_add(&b), Err(Error::PrimeMismatch(3, 5)));
    }

    #[test]
    fn precision_rules() {
        let x = PAdic::new(5, 1, 2.into(), 6);
        let y = PAdic::new(5, 2, 3.into(), 5);
        let m = &x * &y;
        assert_eq!(m.valuation(), 3);
        assert_eq!(m.n_abs(), min(6 + 2, 5 + 1));
        let s = &x + &y;
        assert_eq!(s.n_abs(), 5);
        let d = x.div(&y).unwrap();
        assert_eq!(d.valuation(), -1);
        assert_eq!(d.rel_prec(), min(x.rel_prec(), y.rel_prec()));
    }

    #[test]
    fn log_series_oracle() {
        // log(6) = sum (-1)^(n+1) 5^n / n, summed independently over the rationals
        let prec = 15;
        let mut acc = BigRational::zero();
        for n in 1..60i64 {
            let t = BigRational::new(BigInt::from(5).pow(n as u32), BigInt::from(n));
            if n % 2 == 1 { acc += t } else { acc -= t }
        }
        let oracle = PAdic::from_rational(5, &acc, prec).unwrap();
        let got = padic_log(&PAdic::from_i64(5, 6, prec), &PAdic::zero(5)).unwrap();
        assert!(got.agreement(&oracle) >= prec);
    }

    #[test]
    fn log_branch_and_units() {
        let a = PAdic::from_i64(5, 7, 10);
        let l = padic_log(&PAdic::from_i64(5, 5, 10), &a).unwrap();
        assert!(l.agreement(&a) >= 9);
        let l1 = padic_log(&PAdic::one(5, 10), &PAdic::zero(5)).unwrap();
        assert!(l1.is_zero());
        let w = teichmuller(3, 5, 12).unwrap();
        assert!(padic_log(&w, &PAdic::zero(5)).unwrap().is_zero());
    }

    #[test]
    fn log_two_adic() {
        let prec = 20;
        let lm1 = padic_log(&PAdic::from_i64(2, -1, prec), &PAdic::zero(2)).unwrap();
        assert!(lm1.is_zero());
        let x = PAdic::from_i64(2, 5, prec);
        let y = PAdic::from_i64(2, 7, prec);
        let l = padic_log(&(&x * &y), &PAdic::zero(2)).unwrap();
        let r = &padic_log(&x, &PAdic::zero(2)).unwrap() + &padic_log(&y, &PAdic::zero(2)).unwrap();
        assert!(l.agreement(&r) >= prec - 1);
    }

    #[test]
    fn exp_inverts_log() {
        let x = PAdic::from_i64(7, 7 * 3, 12);
        let e = padic_exp(&x).unwrap();
        let l = padic_log(&e, &PAdic::zero(7)).unwrap();
        assert!(l.agreement(&x) >= 12);
    }

    #[test]
    fn rational_roundtrip() {
        let x = q(7, 3, 49, 10);
        assert_eq!(x.valuation(), -2);
        let y = x.scale_int(49);
        assert!(y.agreement(&PAdic::from_i64(7, 3, 12)) >= 12);
    }

    #[test]
    fn serde_roundtrip() {
        let x = q(5, -3, 25, 9);
        let s = serde_json::to_string(&x).unwrap();
        let y: PAdic = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        let z: PAdic = serde_json::from_str(&serde_json::to_string(&PAdic::zero(5)).unwrap()).unwrap();
        assert!(z.is_exact_zero());
    }
}
