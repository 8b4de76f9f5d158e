use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::rational::RationalFunction;
#[cfg(test)]
use super::rational::QPoly;
use crate::error::{Error, Result};
use crate::freealg::Coeff;
use crate::padic::{floor_log, val_u64, PAdic};

/// The wide open `P^1` minus the residue discs of finitely many points of
/// `Z_p`, together with the truncation order and working precision shared
/// by every function on it.
#[derive(Debug)]
pub struct RigidSpace {
    p: u64,
    poles: Vec<BigRational>,
    pole_vals: Vec<PAdic>,
    order: usize,
    prec: i64,
}

impl RigidSpace {
    pub fn new(p: u64, poles: Vec<BigRational>, order: usize, prec: i64) -> Result<Arc<RigidSpace>> {
        let mut residues = Vec::new();
        let mut pole_vals = Vec::new();
        for b in &poles {
            let v = PAdic::from_rational(p, b, prec)?;
            if v.valuation() < 0 {
                return Err(Error::InvalidInput(format!("pole {b} is not integral")));
            }
            let r = if v.valuation() > 0 { 0 } else { v.residue().unwrap() };
            if residues.contains(&r) {
                return Err(Error::InvalidInput("poles must have distinct reductions".into()));
            }
            residues.push(r);
            pole_vals.push(v);
        }
        if order == 0 {
            return Err(Error::InvalidInput("truncation order must be positive".into()));
        }
        Ok(Arc::new(RigidSpace { p, poles, pole_vals, order, prec }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn poles(&self) -> &[BigRational] {
        &self.poles
    }

    pub fn pole_index(&self, b: &BigRational) -> Option<usize> {
        self.poles.iter().position(|x| x == b)
    }

    fn pole(&self, i: usize) -> &PAdic {
        &self.pole_vals[i]
    }
}

/// `poly(x) + sum_b sum_n parts[b][n-1] (x - b)^(-n)` plus a remainder `R`
/// certified by `w_rho(R) >= tail`, where
/// `w_rho(f) = min_n (v(coefficient of order n) - rho n)` over all ends.
/// On the affinoid where every pole disc has radius `p^-rho` this is the
/// sup-norm valuation, so `tail` bounds the error of every evaluation on
/// the unit region.
#[derive(Clone, Debug)]
pub struct RigidFunction {
    space: Arc<RigidSpace>,
    poly: Vec<PAdic>,
    parts: Vec<Vec<PAdic>>,
    rho: f64,
    tail: f64,
}

fn wval(c: &PAdic, rho: f64, n: usize) -> f64 {
    if c.is_exact_zero() {
        f64::INFINITY
    } else {
        c.valuation() as f64 - rho * n as f64
    }
}

fn trim(v: &mut Vec<PAdic>) {
    while v.last().map(|c| c.is_exact_zero()).unwrap_or(false) {
        v.pop();
    }
}

fn add_vec(a: &[PAdic], b: &[PAdic], p: u64) -> Vec<PAdic> {
    let n = a.len().max(b.len());
    let z = PAdic::zero(p);
    let mut out: Vec<PAdic> = (0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect();
    trim(&mut out);
    out
}

// min over i, j with deg(i) + deg(j) > cut of the weighted valuations, where
// deg(i) = i + shift
fn dropped_bound(a: &[PAdic], b: &[PAdic], shift: usize, cut: usize, rho: f64) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let mut suf = vec![f64::INFINITY; b.len() + 1];
    for j in (0..b.len()).rev() {
        suf[j] = suf[j + 1].min(wval(&b[j], rho, j + shift));
    }
    let mut best = f64::INFINITY;
    for (i, x) in a.iter().enumerate() {
        let wa = wval(x, rho, i + shift);
        if wa == f64::INFINITY {
            continue;
        }
        // need j + shift > cut - (i + shift)
        let need = (cut + 1).saturating_sub(i + 2 * shift);
        if need < b.len() {
            best = best.min(wa + suf[need]);
        }
    }
    best
}

// min over n >= 0 of (d n - floor(log_p(n + 1))); only n = p^k - 1 can be minima
pub(crate) fn integration_loss(p: u64, d: f64) -> f64 {
    let mut best = 0.0f64;
    let mut q: u64 = p;
    let mut k = 1.0;
    loop {
        best = best.min(d * (q - 1) as f64 - k);
        if d * (q * (p - 1)) as f64 >= 1.0 {
            return best;
        }
        q *= p;
        k += 1.0;
    }
}

// min over n > n0 of (n w - floor(log_p n))
fn series_remainder(p: u64, w: f64, n0: u64) -> f64 {
    let f = |n: u64| n as f64 * w - floor_log(p, n) as f64;
    let mut best = f(n0 + 1);
    let mut q = p;
    while q <= n0 + 1 {
        q *= p;
    }
    loop {
        best = best.min(f(q));
        if w * (q * (p - 1)) as f64 >= 1.0 {
            return best;
        }
        q *= p;
    }
}

#[derive(Serialize)]
struct Dump<'a> {
    p: u64,
    order: usize,
    rho: f64,
    tail: Option<f64>,
    poles: Vec<String>,
    poly: &'a [PAdic],
    parts: &'a [Vec<PAdic>],
}

impl RigidFunction {
    pub fn zero(space: &Arc<RigidSpace>, rho: f64) -> RigidFunction {
        RigidFunction { space: space.clone(), poly: Vec::new(), parts: vec![Vec::new(); space.poles.len()], rho, tail: f64::INFINITY }
    }

    pub fn constant(space: &Arc<RigidSpace>, c: PAdic, rho: f64) -> RigidFunction {
        let mut f = RigidFunction::zero(space, rho);
        f.poly = vec![c];
        trim(&mut f.poly);
        f
    }

    pub fn from_poly(space: &Arc<RigidSpace>, coeffs: Vec<PAdic>, rho: f64) -> Result<RigidFunction> {
        if coeffs.len() > space.order + 1 {
            return Err(Error::InvalidInput("polynomial degree exceeds the truncation order".into()));
        }
        let mut f = RigidFunction::zero(space, rho);
        f.poly = coeffs;
        trim(&mut f.poly);
        Ok(f)
    }

    /// `c (x - b)^(-n)` for the pole with index `b`.
    pub fn pole_term(space: &Arc<RigidSpace>, b: usize, n: usize, c: PAdic, rho: f64) -> Result<RigidFunction> {
        if n == 0 || n > space.order || b >= space.poles.len() {
            return Err(Error::InvalidInput("pole term out of range".into()));
        }
        let mut f = RigidFunction::zero(space, rho);
        f.parts[b] = vec![PAdic::zero(space.p); n];
        f.parts[b][n - 1] = c;
        trim(&mut f.parts[b]);
        Ok(f)
    }

    pub fn space(&self) -> &Arc<RigidSpace> {
        &self.space
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn poly(&self) -> &[PAdic] {
        &self.poly
    }

    pub fn part(&self, b: usize) -> &[PAdic] {
        &self.parts[b]
    }

    /// Digits certified by the tail alone.
    pub fn certified_digits(&self) -> i64 {
        if self.tail.is_finite() { self.tail.floor() as i64 } else { i64::MAX / 4 }
    }

    fn p(&self) -> u64 {
        self.space.p
    }

    fn same_space(&self, o: &RigidFunction) -> Result<()> {
        if Arc::ptr_eq(&self.space, &o.space) {
            Ok(())
        } else {
            Err(Error::InvalidInput("functions live on different spaces".into()))
        }
    }

    /// `w_rho` of the stored part.
    pub fn weighted_valuation(&self, rho: f64) -> f64 {
        let mut w = f64::INFINITY;
        for (n, c) in self.poly.iter().enumerate() {
            w = w.min(wval(c, rho, n));
        }
        for part in &self.parts {
            for (i, c) in part.iter().enumerate() {
                w = w.min(wval(c, rho, i + 1));
            }
        }
        w
    }

    /// Highest order appearing at any end.
    pub fn degree(&self) -> usize {
        let mut d = self.poly.len().saturating_sub(1);
        for part in &self.parts {
            d = d.max(part.len());
        }
        d
    }

    /// Restricts the certificate to a smaller `rho`.
    pub fn with_rho(&self, rho: f64) -> RigidFunction {
        let mut f = self.clone();
        if rho < f.rho {
            f.rho = rho;
        }
        f
    }

    pub fn try_add(&self, o: &RigidFunction) -> Result<RigidFunction> {
        self.same_space(o)?;
        let p = self.p();
        Ok(RigidFunction {
            space: self.space.clone(),
            poly: add_vec(&self.poly, &o.poly, p),
            parts: self.parts.iter().zip(&o.parts).map(|(a, b)| add_vec(a, b, p)).collect(),
            rho: self.rho.min(o.rho),
            tail: self.tail.min(o.tail),
        })
    }

    pub fn scale_by(&self, s: &PAdic) -> RigidFunction {
        let mut f = self.clone();
        for c in f.poly.iter_mut().chain(f.parts.iter_mut().flatten()) {
            *c = &*c * s;
        }
        trim(&mut f.poly);
        for part in f.parts.iter_mut() {
            trim(part);
        }
        if !s.is_exact_zero() {
            f.tail += s.valuation() as f64;
        } else {
            f.tail = f64::INFINITY;
        }
        f
    }

    fn map_coeffs(&self, g: impl Fn(&PAdic) -> PAdic) -> RigidFunction {
        let mut f = self.clone();
        for c in f.poly.iter_mut().chain(f.parts.iter_mut().flatten()) {
            *c = g(c);
        }
        f
    }

    // Taylor coefficients at pole b of everything except the b-part, up to u^(len-1)
    fn taylor_off(&self, b: usize, len: usize) -> Vec<PAdic> {
        let p = self.p();
        let bv = self.space.pole(b).clone();
        let z = PAdic::zero(p);
        let mut acc = vec![z.clone(); len];
        // polynomial part: Horner with (b + u)
        if !self.poly.is_empty() {
            let mut s = vec![z.clone(); len];
            for a in self.poly.iter().rev() {
                let mut next = vec![z.clone(); len];
                for j in 0..len {
                    let mut v = &s[j] * &bv;
                    if j > 0 {
                        v = &v + &s[j - 1];
                    }
                    next[j] = v;
                }
                next[0] = &next[0] + a;
                s = next;
            }
            for j in 0..len {
                acc[j] = &acc[j] + &s[j];
            }
        }
        for (c, part) in self.parts.iter().enumerate() {
            if c == b || part.is_empty() {
                continue;
            }
            // y = 1/(d + u) with d = b - c, a unit
            let d = &bv - self.space.pole(c);
            let dinv = d.inv().expect("poles have distinct reductions");
            let times_y = |s: &[PAdic]| -> Vec<PAdic> {
                let mut r: Vec<PAdic> = Vec::with_capacity(len);
                for j in 0..len {
                    let v = if j == 0 { s[0].clone() } else { &s[j] - &r[j - 1] };
                    r.push(&v * &dinv);
                }
                r
            };
            let mut s = vec![z.clone(); len];
            for (k, cn) in part.iter().enumerate().rev() {
                if k + 1 < part.len() {
                    s = times_y(&s);
                }
                s[0] = &s[0] + cn;
            }
            s = times_y(&s);
            for j in 0..len {
                acc[j] = &acc[j] + &s[j];
            }
        }
        acc
    }

    // coefficients of x^-j (j = 1..=deg) of the b-part expanded at infinity
    fn expand_at_infinity(&self, b: usize, deg: usize) -> Vec<PAdic> {
        let p = self.p();
        let z = PAdic::zero(p);
        let part = &self.parts[b];
        let mut out = vec![z.clone(); deg + 1];
        if part.is_empty() || deg == 0 {
            return out;
        }
        let bv = self.space.pole(b);
        // y = 1/(x - b) = sum_{j>=1} b^(j-1) s^j with s = 1/x
        let times_y = |s: &[PAdic]| -> Vec<PAdic> {
            let mut r = vec![z.clone(); deg + 1];
            for j in 1..=deg {
                r[j] = &s[j - 1] + &(bv * &r[j - 1]);
            }
            r
        };
        let mut s = vec![z.clone(); deg + 1];
        for (k, cn) in part.iter().enumerate().rev() {
            if k + 1 < part.len() {
                s = times_y(&s);
            }
            s[0] = &s[0] + cn;
        }
        s = times_y(&s);
        out.clone_from(&s);
        out
    }

    pub fn try_mul(&self, o: &RigidFunction) -> Result<RigidFunction> {
        self.same_space(o)?;
        let p = self.p();
        let t = self.space.order;
        let rho = self.rho.min(o.rho);
        let z = PAdic::zero(p);
        let mut dropped = f64::INFINITY;

        // polynomial end
        let mut poly = vec![z.clone(); (self.poly.len() + o.poly.len()).saturating_sub(1).min(t + 1)];
        for (i, a) in self.poly.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in o.poly.iter().enumerate() {
                if i + j > t {
                    break;
                }
                if !b.is_exact_zero() {
                    poly[i + j] = &poly[i + j] + &(a * b);
                }
            }
        }
        dropped = dropped.min(dropped_bound(&self.poly, &o.poly, 0, t, rho));
        for (q, other) in [(&self.poly, o), (&o.poly, self)] {
            if q.len() < 2 {
                continue;
            }
            let deg = q.len() - 1;
            for b in 0..other.parts.len() {
                if other.parts[b].is_empty() {
                    continue;
                }
                let e = other.expand_at_infinity(b, deg);
                for (k, slot) in poly.iter_mut().enumerate().take(deg) {
                    let mut acc = slot.clone();
                    for j in 1..=(deg - k) {
                        acc = &acc + &(&q[k + j] * &e[j]);
                    }
                    *slot = acc;
                }
            }
        }
        trim(&mut poly);

        // principal parts
        let mut parts = Vec::with_capacity(self.parts.len());
        for b in 0..self.parts.len() {
            let pf = &self.parts[b];
            let pg = &o.parts[b];
            let mut out = vec![z.clone(); (pf.len() + pg.len()).min(t)];
            for (i, a) in pf.iter().enumerate() {
                if a.is_exact_zero() {
                    continue;
                }
                for (j, c) in pg.iter().enumerate() {
                    let ord = i + j + 2;
                    if ord > t {
                        break;
                    }
                    if !c.is_exact_zero() {
                        out[ord - 1] = &out[ord - 1] + &(a * c);
                    }
                }
            }
            dropped = dropped.min(dropped_bound(pf, pg, 1, t, rho));
            for (part, other) in [(pf, o), (pg, self)] {
                if part.is_empty() {
                    continue;
                }
                let tay = other.taylor_off(b, part.len());
                for k in 1..=part.len() {
                    let mut acc = out[k - 1].clone();
                    for (j, tj) in tay.iter().enumerate().take(part.len() - k + 1) {
                        let c = &part[k + j - 1];
                        if !c.is_exact_zero() && !tj.is_exact_zero() {
                            acc = &acc + &(c * tj);
                        }
                    }
                    out[k - 1] = acc;
                }
            }
            trim(&mut out);
            parts.push(out);
        }

        let wf = self.weighted_valuation(rho);
        let wg = o.weighted_valuation(rho);
        let tail = (self.tail + wg).min(o.tail + wf).min(self.tail + o.tail).min(dropped);
        Ok(RigidFunction { space: self.space.clone(), poly, parts, rho, tail })
    }

    pub fn derivative(&self) -> RigidFunction {
        let p = self.p();
        let t = self.space.order;
        let mut poly: Vec<PAdic> = self.poly.iter().enumerate().skip(1).map(|(n, c)| c.scale_int(n as i64)).collect();
        trim(&mut poly);
        let mut dropped = f64::INFINITY;
        let parts = self
            .parts
            .iter()
            .map(|part| {
                let mut out = vec![PAdic::zero(p); (part.len() + 1).min(t)];
                for (i, c) in part.iter().enumerate() {
                    let n = i + 1;
                    let v = c.scale_int(-(n as i64));
                    if n + 1 > t {
                        dropped = dropped.min(wval(&v, self.rho, n + 1));
                    } else {
                        out[n] = v;
                    }
                }
                trim(&mut out);
                out
            })
            .collect();
        RigidFunction { space: self.space.clone(), poly, parts, rho: self.rho, tail: (self.tail - self.rho).min(dropped) }
    }

    /// Moves the principal part at pole `b` into the remainder bound.
    pub fn drop_part(&self, b: usize) -> RigidFunction {
        let mut f = self.clone();
        let part = std::mem::take(&mut f.parts[b]);
        for (i, c) in part.iter().enumerate() {
            f.tail = f.tail.min(wval(c, f.rho, i + 1));
        }
        f
    }

    /// Residue of `f dx` at pole `b`.
    pub fn residue(&self, b: usize) -> PAdic {
        self.parts[b].first().cloned().unwrap_or_else(|| PAdic::zero(self.p()))
    }

    /// Primitive, normalized to vanish at `anchor` if given. The certificate
    /// moves from `rho` to `rho - delta`.
    pub fn primitive(&self, anchor: Option<&PAdic>, delta: f64) -> Result<RigidFunction> {
        let p = self.p();
        let t = self.space.order;
        let rho2 = self.rho - delta;
        if rho2 <= 0.0 {
            return Err(Error::InvalidInput("rho exhausted by repeated integration".into()));
        }
        let mut tail = self.tail;
        for (b, part) in self.parts.iter().enumerate() {
            let Some(r) = part.first() else { continue };
            if r.is_exact_zero() {
                continue;
            }
            let vr = r.valuation() as f64;
            if !r.is_zero() && vr < self.tail {
                return Err(Error::NonzeroResidue(format!("pole {} (valuation {})", self.space.poles[b], r.valuation())));
            }
            tail = tail.min(vr - self.rho);
        }
        let mut dropped = f64::INFINITY;
        let mut poly = vec![PAdic::zero(p)];
        for (n, a) in self.poly.iter().enumerate() {
            let v = a.div_int(n as i64 + 1);
            if n + 1 > t {
                dropped = dropped.min(wval(&v, rho2, n + 1));
            } else {
                poly.push(v);
            }
        }
        let parts: Vec<Vec<PAdic>> = self
            .parts
            .iter()
            .map(|part| {
                let mut out: Vec<PAdic> = part.iter().enumerate().skip(1).map(|(i, c)| c.div_int(-(i as i64))).collect();
                trim(&mut out);
                out
            })
            .collect();
        let tail = if tail.is_finite() { tail - rho2 + integration_loss(p, delta) } else { tail };
        let mut f = RigidFunction { space: self.space.clone(), poly, parts, rho: rho2, tail: tail.min(dropped) };
        trim(&mut f.poly);
        if let Some(a) = anchor {
            let c = f.eval(a)?;
            f = f.try_add(&RigidFunction::constant(&self.space, -&c, rho2))?;
        }
        Ok(f)
    }

    /// Value at a point of the unit region, at infinity-side points when the
    /// polynomial end is constant, or inside a pole disc whose part is empty.
    pub fn eval(&self, z: &PAdic) -> Result<PAdic> {
        let p = self.p();
        if z.p() != p {
            return Err(Error::PrimeMismatch(p, z.p()));
        }
        let cap = self.certified_digits();
        if z.valuation() < 0 {
            self.check_constant_at_infinity()?;
        }
        let mut acc = PAdic::zero(p);
        for c in self.poly.iter().rev() {
            acc = &(&acc * z) + c;
        }
        for (b, part) in self.parts.iter().enumerate() {
            if part.is_empty() {
                continue;
            }
            let d = z - self.space.pole(b);
            if z.valuation() >= 0 && d.valuation() != 0 {
                return Err(Error::OutOfDomain(format!("point lies in the disc of pole {}", self.space.poles[b])));
            }
            let y = d.inv()?;
            let mut s = PAdic::zero(p);
            for c in part.iter().rev() {
                s = &(&s + c) * &y;
            }
            acc = &acc + &s;
        }
        Ok(acc.truncate(cap))
    }

    fn check_constant_at_infinity(&self) -> Result<()> {
        for (n, c) in self.poly.iter().enumerate().skip(1) {
            if !c.is_zero() && (c.valuation() as f64) < self.tail {
                return Err(Error::OutOfDomain(format!("pole of order {n} at infinity")));
            }
        }
        Ok(())
    }

    /// Value at infinity.
    pub fn eval_infinity(&self) -> Result<PAdic> {
        self.check_constant_at_infinity()?;
        let c = self.poly.first().cloned().unwrap_or_else(|| PAdic::zero(self.p()));
        let mut cap = self.certified_digits();
        for c in self.poly.iter().skip(1) {
            cap = cap.min(c.n_abs());
        }
        Ok(c.truncate(cap))
    }

    /// JSON debug dump of the stored coefficients and certificate.
    pub fn dump_json(&self) -> String {
        let d = Dump {
            p: self.p(),
            order: self.space.order,
            rho: self.rho,
            tail: if self.tail.is_finite() { Some(self.tail) } else { None },
            poles: self.space.poles.iter().map(|b| b.to_string()).collect(),
            poly: &self.poly,
            parts: &self.parts,
        };
        serde_json::to_string(&d).expect("serializable")
    }

    /// `log(1 + self)` for `w_0(self) > 0`; the series is cut once its
    /// remainder is certified to `target` in `w_rho`.
    pub fn log_one_plus(&self, target: f64) -> Result<RigidFunction> {
        let p = self.p();
        let w0 = self.weighted_valuation(0.0);
        if w0 < 1.0 {
            return Err(Error::NotAUnitNearOne);
        }
        let w = self.weighted_valuation(self.rho);
        if w <= 0.0 {
            return Err(Error::InvalidInput("rho too large for the log series".into()));
        }
        if w == f64::INFINITY {
            return Ok(RigidFunction::zero(&self.space, self.rho));
        }
        let mut n0: u64 = 1;
        while series_remainder(p, w, n0) < target {
            n0 += 1;
        }
        let rem = series_remainder(p, w, n0);
        let mut acc = RigidFunction::zero(&self.space, self.rho);
        let mut pw = self.clone();
        for k in 1..=n0 {
            let term = pw.map_coeffs(|c| c.div_int(k as i64));
            let term = RigidFunction { tail: pw.tail - val_u64(p, k) as f64, ..term };
            acc = if k % 2 == 1 { acc.try_add(&term)? } else { acc.try_add(&Coeff::neg(&term))? };
            if k < n0 {
                pw = pw.try_mul(self)?;
            }
        }
        acc.tail = acc.tail.min(rem);
        Ok(acc)
    }
}

/// Exact rational function to rigid function, when its denominator splits
/// over the poles of the space.
pub fn from_rational(f: &RationalFunction, space: &Arc<RigidSpace>, rho: f64) -> Result<RigidFunction> {
    let p = space.p;
    let mut den = f.den.clone();
    let mut factors = Vec::new();
    for (i, b) in space.poles.iter().enumerate() {
        let e = den.root_order(b);
        for _ in 0..e {
            den = den.div_linear(b).0;
        }
        if e > 0 {
            factors.push((i, e));
        }
    }
    if den.degree() != Some(0) {
        return Err(Error::InvalidInput("denominator does not split over the marked points".into()));
    }
    let lead = den.0[0].clone();
    let num = f.num.scale(&(BigRational::one() / lead));
    let coeffs = num.0.iter().map(|c| PAdic::from_rational(p, c, space.prec)).collect::<Result<Vec<_>>>()?;
    let mut out = RigidFunction::from_poly(space, coeffs, rho)?;
    for (i, e) in factors {
        let y = RigidFunction::pole_term(space, i, 1, PAdic::one(p, space.prec), rho)?;
        for _ in 0..e {
            out = out.try_mul(&y)?;
        }
    }
    Ok(out)
}

pub(super) fn log_of_unit(f: &RationalFunction, space: &Arc<RigidSpace>, rho: f64, target: f64) -> Result<RigidFunction> {
    let (g, sign) = match from_rational(f, space, rho) {
        Ok(g) => (g, 1),
        Err(_) => (from_rational(&f.inverse(), space, rho)?, -1),
    };
    let one = RigidFunction::constant(space, PAdic::one(space.p, space.prec), rho);
    let h = g.try_add(&one.scale_by(&PAdic::from_i64(space.p, -1, space.prec)))?;
    let l = h.log_one_plus(target)?;
    Ok(if sign < 0 { Coeff::neg(&l) } else { l })
}

impl Coeff for RigidFunction {
    fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("same space")
    }
    fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("same space")
    }
    fn neg(&self) -> Self {
        self.map_coeffs(|c| -c)
    }
    fn scale(&self, s: &PAdic) -> Self {
        self.scale_by(s)
    }
    fn is_zero(&self) -> bool {
        self.poly.is_empty() && self.parts.iter().all(|p| p.is_empty()) && self.tail == f64::INFINITY
    }
    fn zero_like(&self) -> Self {
        RigidFunction::zero(&self.space, self.rho)
    }
    fn try_inv(&self) -> Option<Self> {
        if self.poly.len() > 1 || self.parts.iter().any(|p| !p.is_empty()) {
            return None;
        }
        let c = self.poly.first()?.inv().ok()?;
        Some(RigidFunction::constant(&self.space, c, self.rho))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn space(p: u64, order: usize, prec: i64) -> Arc<RigidSpace> {
        RigidSpace::new(p, vec![q(0), q(1)], order, prec).unwrap()
    }

    #[test]
    fn partial_fractions_of_product() {
        // 1/(x (x-1)) = 1/(x-1) - 1/x
        let s = space(5, 10, 20);
        let a = RigidFunction::pole_term(&s, 0, 1, PAdic::one(5, 20), 0.1).unwrap();
        let b = RigidFunction::pole_term(&s, 1, 1, PAdic::one(5, 20), 0.1).unwrap();
        let c = a.try_mul(&b).unwrap();
        assert!(c.part(0)[0].agreement(&PAdic::from_i64(5, -1, 20)) >= 20);
        assert!(c.part(1)[0].agreement(&PAdic::one(5, 20)) >= 20);
        assert!(c.poly().is_empty());
        let z = PAdic::from_i64(5, 3, 20);
        let direct = PAdic::one(5, 20).div(&(&z * &(&z - &PAdic::one(5, 20)))).unwrap();
        assert!(c.eval(&z).unwrap().agreement(&direct) >= 20);
    }

    #[test]
    fn polynomial_times_pole() {
        // (x^2 + 2) / (x - 1) = x + 1 + 3/(x-1)
        let s = space(7, 10, 20);
        let f = RigidFunction::from_poly(&s, vec![PAdic::from_i64(7, 2, 20), PAdic::zero(7), PAdic::one(7, 20)], 0.1).unwrap();
        let y = RigidFunction::pole_term(&s, 1, 1, PAdic::one(7, 20), 0.1).unwrap();
        let g = f.try_mul(&y).unwrap();
        assert_eq!(g.poly().len(), 2);
        assert!(g.poly()[0].agreement(&PAdic::one(7, 20)) >= 20);
        assert!(g.part(1)[0].agreement(&PAdic::from_i64(7, 3, 20)) >= 20);
    }

    #[test]
    fn log_of_correction_unit_matches_pointwise_log() {
        // q = (x^p - 1)/(x - 1)^p on the complement of the disc of 1
        let p = 5;
        let prec = 20;
        let s = space(p, 200, prec);
        let num = QPoly::from_ints(&[-1, 0, 0, 0, 0, 1]);
        let den = QPoly::linear(&q(1)).pow(5);
        let f = RationalFunction::new(num.clone(), den.clone());
        let l = log_of_unit(&f, &s, 1.0 / 8.0, 24.0).unwrap();
        assert!(l.certified_digits() >= 16, "tail {}", l.tail());
        for z in [2i64, 3, 4, 12] {
            let zq = q(z);
            let val = num.eval(&zq) / den.eval(&zq);
            let pv = PAdic::from_rational(p, &val, prec).unwrap();
            let direct = crate::padic::padic_log(&pv, &PAdic::zero(p)).unwrap();
            let got = l.eval(&PAdic::from_i64(p, z, prec)).unwrap();
            assert!(got.agreement(&direct) >= 15, "z={z}: {got} vs {direct}");
        }
    }

    #[test]
    fn primitive_then_derivative() {
        let p = 3;
        let s = space(p, 60, 30);
        let g = RigidFunction::pole_term(&s, 1, 2, PAdic::from_i64(p, 3, 30), 0.2).unwrap();
        let g = g.try_add(&RigidFunction::pole_term(&s, 1, 3, PAdic::from_i64(p, 9, 30), 0.2).unwrap()).unwrap();
        let f = g.primitive(Some(&PAdic::zero(p)), 0.01).unwrap();
        let back = f.derivative();
        for (i, c) in g.part(1).iter().enumerate() {
            assert!(back.part(1)[i].agreement(c) >= 25);
        }
        assert!(f.eval(&PAdic::zero(p)).unwrap().is_zero());
    }

    #[test]
    fn residue_is_rejected() {
        let s = space(5, 10, 20);
        let g = RigidFunction::pole_term(&s, 0, 1, PAdic::one(5, 20), 0.1).unwrap();
        assert!(matches!(g.primitive(None, 0.01), Err(Error::NonzeroResidue(_))));
    }

    #[test]
    fn integration_loss_is_finite() {
        let l = integration_loss(7, 0.01);
        assert!(l < 0.0 && l > -4.0);
    }
}
