use crate::error::{Error, Result};
use crate::freealg::Coeff;
use crate::padic::{floor_log, legendre, PAdic};

/// A meromorphic one-form `residue dt/t + sum_n regular[n] t^n dt` in a local
/// coordinate, with integral coefficients.
#[derive(Clone, Debug)]
pub struct LocalForm {
    pub residue: PAdic,
    pub regular: Vec<PAdic>,
}

/// `sum c[n][k] t^n l^k / k!` with `l = log t`, truncated at `t^order`.
///
/// `depth` counts the integrations that produced the series; coefficient
/// denominators are bounded by `depth * floor(log_p n)` digits, which is
/// what the evaluation tail bound uses.
#[derive(Clone, Debug)]
pub struct LogSeries {
    p: u64,
    order: usize,
    depth: usize,
    c: Vec<Vec<PAdic>>,
}

impl LogSeries {
    pub fn zero(p: u64, order: usize) -> LogSeries {
        LogSeries { p, order, depth: 0, c: Vec::new() }
    }

    pub fn constant(c: PAdic, order: usize) -> LogSeries {
        let p = c.p();
        let mut s = LogSeries::zero(p, order);
        s.set(0, 0, c);
        s
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn log_degree(&self) -> usize {
        self.c.iter().map(|r| r.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn coeff(&self, n: usize, k: usize) -> PAdic {
        self.c.get(n).and_then(|r| r.get(k)).cloned().unwrap_or_else(|| PAdic::zero(self.p))
    }

    pub fn set(&mut self, n: usize, k: usize, v: PAdic) {
        if n > self.order {
            return;
        }
        if self.c.len() <= n {
            self.c.resize(n + 1, Vec::new());
        }
        let row = &mut self.c[n];
        if row.len() <= k {
            row.resize(k + 1, PAdic::zero(self.p));
        }
        row[k] = v;
    }

    fn bump(&mut self, n: usize, k: usize, v: &PAdic) {
        if n > self.order || v.is_exact_zero() {
            return;
        }
        let cur = self.coeff(n, k);
        self.set(n, k, &cur + v);
    }

    pub fn with_depth(mut self, d: usize) -> LogSeries {
        self.depth = d;
        self
    }

    /// `t d/dt`.
    pub fn theta(&self) -> LogSeries {
        let mut out = LogSeries::zero(self.p, self.order);
        out.depth = self.depth;
        for (n, row) in self.c.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if n > 0 {
                    out.bump(n, k, &c.scale_int(n as i64));
                }
                if k > 0 {
                    out.bump(n, k - 1, c);
                }
            }
        }
        out
    }

    /// The primitive of `self * kernel` with zero integration constants.
    pub fn integrate(&self, kernel: &LocalForm) -> Result<LogSeries> {
        if kernel.residue.p() != self.p {
            return Err(Error::PrimeMismatch(self.p, kernel.residue.p()));
        }
        let mut out = LogSeries::zero(self.p, self.order);
        out.depth = self.depth + 1;
        for (n, row) in self.c.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                if c.is_exact_zero() {
                    continue;
                }
                if !kernel.residue.is_exact_zero() {
                    let cr = c * &kernel.residue;
                    if n == 0 {
                        out.bump(0, k + 1, &cr);
                    } else {
                        out.add_integral(n, k, &cr);
                    }
                }
                for (m, g) in kernel.regular.iter().enumerate() {
                    let e = n + m + 1;
                    if e > self.order {
                        break;
                    }
                    if g.is_exact_zero() {
                        continue;
                    }
                    out.add_integral(e, k, &(c * g));
                }
            }
        }
        Ok(out)
    }

    // adds c * integral of t^(e-1) l^k/k! dt
    fn add_integral(&mut self, e: usize, k: usize, c: &PAdic) {
        let mut term = c.div_int(e as i64);
        for j in 0..=k {
            let v = if j % 2 == 0 { term.clone() } else { -&term };
            self.bump(e, k - j, &v);
            term = term.div_int(e as i64);
        }
    }

    /// Evaluates with `t -> t_val` (or `t -> 0` for a tangential point) and
    /// `l -> ell`. The result is capped by the certified tail bound.
    pub fn eval(&self, t_val: Option<&PAdic>, ell: &PAdic) -> Result<PAdic> {
        let p = self.p;
        let deg = self.log_degree();
        // lpow[k] = l^k / k! for k >= 1; k = 0 is handled without a multiplication
        let mut lpow = vec![PAdic::zero(p)];
        for k in 1..=deg.max(self.depth) {
            let next = if k == 1 { ell.clone() } else { (&lpow[k - 1] * ell).div_int(k as i64) };
            lpow.push(next);
        }
        let row_val = |row: &Vec<PAdic>| -> PAdic {
            let mut acc = PAdic::zero(p);
            for (k, c) in row.iter().enumerate() {
                if c.is_exact_zero() {
                    continue;
                }
                acc = if k == 0 { &acc + c } else { &acc + &(c * &lpow[k]) };
            }
            acc
        };
        match t_val {
            None => Ok(self.c.first().map(row_val).unwrap_or_else(|| PAdic::zero(p))),
            Some(t) => {
                let e = t.valuation();
                if e < 1 {
                    return Err(Error::OutOfDomain("log series evaluated outside its disc".into()));
                }
                let mut acc = PAdic::zero(p);
                for row in self.c.iter().rev() {
                    acc = &(&acc * t) + &row_val(row);
                }
                if self.c.is_empty() {
                    return Ok(acc);
                }
                let lmin = if ell.is_exact_zero() {
                    0
                } else {
                    (1..lpow.len()).map(|k| k as i64 * ell.valuation() - legendre(p, k as u64)).min().unwrap_or(0).min(0)
                };
                let tail = self.tail_bound(e) + lmin;
                Ok(acc.truncate(tail))
            }
        }
    }

    /// `min_{n > order} (n e - depth floor(log_p n))`.
    pub fn tail_bound(&self, e: i64) -> i64 {
        let d = self.depth as i64;
        let p = self.p as i64;
        let f = |n: i64| n * e - d * floor_log(self.p, n as u64);
        // between consecutive powers of p the bound increases, so only
        // order + 1 and the powers of p above it can be minima
        let start = self.order as i64 + 1;
        let mut best = f(start);
        let mut q = p;
        while q <= start {
            q *= p;
        }
        loop {
            best = best.min(f(q));
            if q * (p - 1) * e >= d {
                return best;
            }
            q *= p;
        }
    }

    /// Smallest `order` whose tail bound at `v(t) = e` reaches `target`.
    pub fn order_for(p: u64, depth: usize, e: i64, target: i64) -> usize {
        let probe = |order: usize| LogSeries { p, order, depth, c: Vec::new() }.tail_bound(e);
        let mut order = (target / e.max(1)).max(1) as usize;
        while probe(order) < target {
            order += 1 + order / 8;
        }
        order
    }
}

impl Coeff for LogSeries {
    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.depth = self.depth.max(o.depth);
        out.order = self.order.min(o.order);
        for (n, row) in o.c.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                out.bump(n, k, c);
            }
        }
        out
    }

    fn mul(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let mut out = LogSeries::zero(self.p, order);
        out.depth = self.depth + o.depth;
        for (n1, r1) in self.c.iter().enumerate() {
            for (n2, r2) in o.c.iter().enumerate() {
                if n1 + n2 > order {
                    break;
                }
                for (k1, a) in r1.iter().enumerate() {
                    if a.is_exact_zero() {
                        continue;
                    }
                    for (k2, b) in r2.iter().enumerate() {
                        if b.is_exact_zero() {
                            continue;
                        }
                        // (l^k1/k1!)(l^k2/k2!) = C(k1+k2, k1) l^(k1+k2)/(k1+k2)!
                        let binom = num_integer::binomial(k1 as i64 + k2 as i64, k1 as i64);
                        out.bump(n1 + n2, k1 + k2, &(a * b).scale_int(binom));
                    }
                }
            }
        }
        out
    }

    fn neg(&self) -> Self {
        let mut out = self.clone();
        for row in out.c.iter_mut() {
            for c in row.iter_mut() {
                *c = -&*c;
            }
        }
        out
    }

    fn scale(&self, s: &PAdic) -> Self {
        let mut out = self.clone();
        for row in out.c.iter_mut() {
            for c in row.iter_mut() {
                *c = &*c * s;
            }
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.c.iter().all(|r| r.iter().all(|c| c.is_exact_zero()))
    }

    fn zero_like(&self) -> Self {
        LogSeries::zero(self.p, self.order)
    }

    fn try_inv(&self) -> Option<Self> {
        let is_const = self.c.iter().enumerate().all(|(n, r)| r.iter().enumerate().all(|(k, c)| (n == 0 && k == 0) || c.is_exact_zero()));
        if !is_const {
            return None;
        }
        let c0 = self.coeff(0, 0).inv().ok()?;
        Some(LogSeries::constant(c0, self.order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(p: u64, order: usize, prec: i64) -> LocalForm {
        // dt/(1-t)
        LocalForm { residue: PAdic::zero(p), regular: vec![PAdic::one(p, prec); order] }
    }

    fn dlog(p: u64, prec: i64) -> LocalForm {
        LocalForm { residue: PAdic::one(p, prec), regular: Vec::new() }
    }

    #[test]
    fn integrate_one_against_geometric() {
        let p = 5;
        let one = LogSeries::constant(PAdic::one(p, 20), 30);
        let f = one.integrate(&geometric(p, 30, 20)).unwrap();
        for n in 1..=30 {
            assert!(f.coeff(n, 0).agreement(&PAdic::from_ratio(p, 1, n as i64, 20).unwrap()) >= 20 - 3);
        }
        let l = one.integrate(&dlog(p, 20)).unwrap();
        assert!(l.coeff(0, 1).agreement(&PAdic::one(p, 20)) >= 20);
    }

    #[test]
    fn theta_of_integral_recovers_integrand() {
        let p = 3;
        let order = 25;
        let one = LogSeries::constant(PAdic::one(p, 30), order);
        let f = one.integrate(&dlog(p, 30)).unwrap().integrate(&geometric(p, order, 30)).unwrap();
        let g = f.integrate(&dlog(p, 30)).unwrap();
        // theta(g) = f because the kernel is dt/t
        let th = g.theta();
        for n in 0..=order {
            for k in 0..3 {
                assert!(th.coeff(n, k).agreement(&f.coeff(n, k)) >= 20, "n={n} k={k}");
            }
        }
        // theta(f) = t * (int of dlog) / (1 - t), checked on low orders
        let th = f.theta();
        let h = one.integrate(&dlog(p, 30)).unwrap();
        for n in 1..10 {
            let mut s = PAdic::zero(p);
            for m in 0..n {
                s = &s + &h.coeff(m, 1);
            }
            assert!(th.coeff(n, 1).agreement(&s) >= 20);
        }
    }

    #[test]
    fn eval_polylog_at_p() {
        // sum p^n / n^2, summed independently
        let p = 5;
        let prec = 12;
        let order = LogSeries::order_for(p, 2, 1, prec + 2);
        let one = LogSeries::constant(PAdic::one(p, prec + 8), order);
        let li1 = one.integrate(&geometric(p, order, prec + 8)).unwrap();
        let li2 = li1.integrate(&dlog(p, prec + 8)).unwrap();
        let z = PAdic::from_i64(p, 5, prec + 8);
        let v = li2.eval(Some(&z), &PAdic::zero(p)).unwrap();
        let mut oracle = num_rational::BigRational::from_integer(0.into());
        for n in 1..80i64 {
            oracle += num_rational::BigRational::new(num_bigint::BigInt::from(5).pow(n as u32), (n * n).into());
        }
        let o = PAdic::from_rational(p, &oracle, prec).unwrap();
        assert!(v.agreement(&o) >= prec);
        assert!(v.n_abs() >= prec);
    }

    #[test]
    fn tail_bound_monotone_in_order() {
        let s = LogSeries::zero(7, 40).with_depth(3);
        let t = LogSeries::zero(7, 80).with_depth(3);
        assert!(t.tail_bound(1) >= s.tail_bound(1));
        assert!(s.tail_bound(1) >= 41 - 3 * 2);
    }
}
