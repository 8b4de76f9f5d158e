//! The universal unipotent connection on `P^1` minus marked points, its
//! local solutions in residue discs, and transport inside a disc.
//!
//! Convention: letter `e_i` belongs to the marked point `a_i` (`i >= 1`) and
//! the connection form is `Omega = sum_i kappa_i e_i` with
//! `kappa_i = sign_i * (dlog(x - a_i) - dlog(x - a_0))` (finite terms only).
//! Horizontal sections satisfy `dG = Omega G`, and in a word the leftmost
//! letter is the outermost integration. The default signs are `+1` for the
//! first letter and `-1` for the others, which for `{inf, 0, 1}` gives
//! `Omega = A dx/x + B dx/(1-x)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freealg::{NcSeries, Word, DEFAULT_ALPHABET};
use crate::padic::{floor_log, padic_log, PAdic};
use crate::rigid::{LocalForm, LogSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MarkedPoint {
    Finite(BigRational),
    Infinity,
}

impl MarkedPoint {
    pub fn parse(s: &str) -> Result<MarkedPoint> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(MarkedPoint::Infinity);
        }
        s.parse::<BigRational>().map(MarkedPoint::Finite).map_err(|_| Error::InvalidInput(format!("bad point {s:?}")))
    }
}

impl fmt::Display for MarkedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkedPoint::Finite(q) => write!(f, "{q}"),
            MarkedPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Reduction of a point of `P^1(Z_p)` to `P^1(F_p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residue {
    Finite(u64),
    Infinity,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

#[derive(Clone, Debug)]
pub struct DivisorConfig {
    p: u64,
    points: Vec<MarkedPoint>,
    weight: usize,
    signs: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct ConfigJson {
    p: u64,
    points: Vec<String>,
    #[serde(rename = "N")]
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signs: Option<Vec<i64>>,
}

fn rational_residue(p: u64, q: &BigRational) -> Result<Residue> {
    let pv = PAdic::from_rational(p, q, 2)?;
    if pv.valuation() < 0 {
        return Ok(Residue::Infinity);
    }
    Ok(Residue::Finite(if pv.valuation() > 0 { 0 } else { pv.residue().unwrap() }))
}

impl DivisorConfig {
    pub fn new(p: u64, points: Vec<MarkedPoint>, weight: usize) -> Result<DivisorConfig> {
        let s = points.len().saturating_sub(1);
        let signs = (0..s).map(|i| if i == 0 { 1 } else { -1 }).collect();
        DivisorConfig::with_signs(p, points, weight, signs)
    }

    pub fn with_signs(p: u64, points: Vec<MarkedPoint>, weight: usize, signs: Vec<i64>) -> Result<DivisorConfig> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if points.len() < 2 {
            return Err(Error::InvalidInput("need at least two marked points".into()));
        }
        if points.len() > DEFAULT_ALPHABET.len() + 1 {
            return Err(Error::InvalidInput("too many marked points".into()));
        }
        if weight == 0 {
            return Err(Error::InvalidInput("truncation weight must be positive".into()));
        }
        if signs.len() != points.len() - 1 || signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::InvalidInput("one sign (+1 or -1) per letter".into()));
        }
        let mut seen = Vec::new();
        for pt in &points {
            let r = match pt {
                MarkedPoint::Infinity => Residue::Infinity,
                MarkedPoint::Finite(q) => {
                    let r = rational_residue(p, q)?;
                    if r == Residue::Infinity {
                        return Err(Error::InvalidInput(format!("finite marked point {q} must be p-integral")));
                    }
                    r
                }
            };
            if seen.contains(&r) {
                return Err(Error::InvalidInput("marked points must have distinct reductions mod p".into()));
            }
            seen.push(r);
        }
        Ok(DivisorConfig { p, points, weight, signs })
    }

    /// `P^1 - {inf, 0, 1}` with letters `A` (at 0) and `B` (at 1).
    pub fn mzv(p: u64, weight: usize) -> Result<DivisorConfig> {
        DivisorConfig::new(p, vec![MarkedPoint::Infinity, MarkedPoint::Finite(BigRational::zero()), MarkedPoint::Finite(BigRational::one())], weight)
    }

    pub fn from_json(s: &str) -> Result<DivisorConfig> {
        let c: ConfigJson = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let points = c.points.iter().map(|s| MarkedPoint::parse(s)).collect::<Result<Vec<_>>>()?;
        match c.signs {
            Some(signs) => DivisorConfig::with_signs(c.p, points, c.n, signs),
            None => DivisorConfig::new(c.p, points, c.n),
        }
    }

    pub fn to_json(&self) -> String {
        let c = ConfigJson { p: self.p, points: self.points.iter().map(|x| x.to_string()).collect(), n: self.weight, signs: Some(self.signs.clone()) };
        serde_json::to_string(&c).expect("serializable")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn points(&self) -> &[MarkedPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &MarkedPoint {
        &self.points[i]
    }

    pub fn letters(&self) -> usize {
        self.points.len() - 1
    }

    pub fn signs(&self) -> &[i64] {
        &self.signs
    }

    pub fn alphabet(&self) -> Vec<char> {
        DEFAULT_ALPHABET[..self.letters()].to_vec()
    }

    pub fn with_weight(&self, weight: usize) -> DivisorConfig {
        DivisorConfig { weight, ..self.clone() }
    }

    /// Index of the marked point equal to `q`.
    pub fn index_of(&self, q: &MarkedPoint) -> Option<usize> {
        self.points.iter().position(|x| x == q)
    }

    /// Finite marked points, in order.
    pub fn finite_points(&self) -> Vec<BigRational> {
        self.points
            .iter()
            .filter_map(|x| match x {
                MarkedPoint::Finite(q) => Some(q.clone()),
                MarkedPoint::Infinity => None,
            })
            .collect()
    }

    pub fn residue_of_marked(&self, i: usize) -> Residue {
        match &self.points[i] {
            MarkedPoint::Infinity => Residue::Infinity,
            MarkedPoint::Finite(q) => rational_residue(self.p, q).expect("validated"),
        }
    }

    /// `kappa_letter = sum c dx/(x - a_b)` as `(c, b)` pairs, `b` a point index.
    pub fn form_terms(&self, letter: usize) -> Vec<(i64, usize)> {
        let s = self.signs[letter];
        let mut out = Vec::new();
        if let MarkedPoint::Finite(_) = self.points[letter + 1] {
            out.push((s, letter + 1));
        }
        if let MarkedPoint::Finite(_) = self.points[0] {
            out.push((-s, 0));
        }
        out
    }

    pub fn point_value(&self, i: usize, prec: i64) -> Option<PAdic> {
        match &self.points[i] {
            MarkedPoint::Finite(q) => Some(PAdic::from_rational(self.p, q, prec).expect("p-integral")),
            MarkedPoint::Infinity => None,
        }
    }

    /// Which residue disc a point of `P^1(Q_p)` lies in.
    pub fn disc_of(&self, z: &PAdic) -> Disc {
        let r = if z.valuation() < 0 {
            Residue::Infinity
        } else if z.valuation() > 0 {
            Residue::Finite(0)
        } else {
            Residue::Finite(z.residue().unwrap())
        };
        match (0..self.points.len()).find(|&i| self.residue_of_marked(i) == r) {
            Some(i) => Disc::Marked(i),
            None => Disc::Good(r),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disc {
    Marked(usize),
    Good(Residue),
}

/// A fibre functor: a point, or a tangent vector `xi` at a marked point,
/// measured in the local coordinate `x - a` (or `1/x` at infinity).
#[derive(Clone, Debug)]
pub enum FibreFunctorSpec {
    Point(PAdic),
    Tangential { point: usize, xi: PAdic },
}

impl FibreFunctorSpec {
    pub fn tangential(point: usize, p: u64, prec: i64) -> FibreFunctorSpec {
        FibreFunctorSpec::Tangential { point, xi: PAdic::one(p, prec) }
    }

    pub fn disc(&self, config: &DivisorConfig) -> Disc {
        match self {
            FibreFunctorSpec::Point(z) => config.disc_of(z),
            FibreFunctorSpec::Tangential { point, .. } => Disc::Marked(*point),
        }
    }

    pub fn validate(&self, config: &DivisorConfig) -> Result<()> {
        match self {
            FibreFunctorSpec::Point(z) => {
                if z.p() != config.p {
                    return Err(Error::PrimeMismatch(config.p, z.p()));
                }
                if z.is_zero() {
                    if let Some(i) = config.index_of(&MarkedPoint::Finite(BigRational::zero())) {
                        return Err(Error::InvalidInput(format!("point coincides with marked point {}", config.points[i])));
                    }
                }
                if let Disc::Marked(i) = config.disc_of(z) {
                    if let Some(a) = config.point_value(i, z.n_abs().max(1)) {
                        if (z - &a).is_zero() {
                            return Err(Error::InvalidInput("point coincides with a marked point".into()));
                        }
                    }
                }
                Ok(())
            }
            FibreFunctorSpec::Tangential { point, xi } => {
                if *point >= config.points.len() {
                    return Err(Error::InvalidInput("no such marked point".into()));
                }
                if xi.is_zero() {
                    return Err(Error::InvalidInput("tangent vector must be nonzero".into()));
                }
                Ok(())
            }
        }
    }
}

/// Expansion center for local solutions.
#[derive(Clone, Debug)]
pub enum Center {
    /// A marked point, with its own coordinate.
    Marked(usize),
    /// An unmarked finite point `c`, coordinate `x - c`.
    Finite(PAdic),
    /// Unmarked infinity, coordinate `1/x`.
    Infinity,
}

fn is_infinite_center(config: &DivisorConfig, c: &Center) -> bool {
    match c {
        Center::Infinity => true,
        Center::Marked(i) => config.points[*i] == MarkedPoint::Infinity,
        Center::Finite(_) => false,
    }
}

/// Local expansion of `kappa_letter` at `center` up to `t^(order-1) dt`.
pub fn local_form(config: &DivisorConfig, letter: usize, center: &Center, order: usize, prec: i64) -> Result<LocalForm> {
    let p = config.p;
    let mut residue = PAdic::zero(p);
    let mut regular = vec![PAdic::zero(p); order];
    for (c, b) in config.form_terms(letter) {
        let bv = config.point_value(b, prec).unwrap();
        if is_infinite_center(config, center) {
            // dx/(x - b) = -dt/t - sum b^(n+1) t^n dt
            residue = &residue - &PAdic::from_i64(p, c, prec);
            let mut pw = bv.clone();
            for slot in regular.iter_mut() {
                *slot = &*slot - &pw.scale_int(c);
                pw = &pw * &bv;
            }
            continue;
        }
        let cv = match center {
            Center::Marked(i) if *i == b => {
                residue = &residue + &PAdic::from_i64(p, c, prec);
                continue;
            }
            Center::Marked(i) => config.point_value(*i, prec).unwrap(),
            Center::Finite(z) => z.clone(),
            Center::Infinity => unreachable!(),
        };
        // dt/(t + d) with d = center - b a unit
        let d = &cv - &bv;
        if d.valuation() != 0 {
            return Err(Error::OutOfDomain("expansion center shares a disc with a marked point".into()));
        }
        let dinv = d.inv()?;
        let mut pw = dinv.scale_int(c);
        let neg_dinv = -&dinv;
        for slot in regular.iter_mut() {
            *slot = &*slot + &pw;
            pw = &pw * &neg_dinv;
        }
    }
    Ok(LocalForm { residue, regular })
}

/// Fundamental solution at `center` with zero integration constants: the
/// section that takes the value 1 at the tangent vector `1` (or at the center).
pub fn local_fundamental_solution(config: &DivisorConfig, center: &Center, order: usize, prec: i64) -> Result<NcSeries<LogSeries>> {
    let p = config.p;
    let forms = (0..config.letters()).map(|j| local_form(config, j, center, order, prec)).collect::<Result<Vec<_>>>()?;
    let mut g = NcSeries::identity(config.letters(), config.weight, LogSeries::constant(PAdic::one(p, prec), order));
    for w in 1..=config.weight {
        for word in Word::all_of_weight(config.letters(), w) {
            let rest = Word(word.0[1..].to_vec());
            let Some(c) = g.coeff(&rest).cloned() else { continue };
            let v = c.integrate(&forms[word.0[0] as usize])?;
            g.set(word, v)?;
        }
    }
    Ok(g)
}

/// Local coordinate of `z` at `center`.
fn coordinate(config: &DivisorConfig, center: &Center, z: &PAdic) -> Result<PAdic> {
    if is_infinite_center(config, center) {
        return z.inv();
    }
    let c = match center {
        Center::Marked(i) => config.point_value(*i, z.n_abs().max(1) + 4).unwrap(),
        Center::Finite(c) => c.clone(),
        Center::Infinity => unreachable!(),
    };
    Ok(z - &c)
}

fn eval_solution(g: &NcSeries<LogSeries>, t: Option<&PAdic>, ell: &PAdic) -> Result<NcSeries<PAdic>> {
    g.try_map(|c| c.eval(t, ell))
}

/// `log(t)` of a local coordinate value with branch `log p = a`.
fn log_branch(t: &PAdic, a: &PAdic) -> Result<PAdic> {
    padic_log(t, a)
}

/// Transport `gamma_{to <- from}` between two fibre functors in one residue disc.
pub fn tiny_transport(config: &DivisorConfig, from: &FibreFunctorSpec, to: &FibreFunctorSpec, branch: &PAdic, prec: i64) -> Result<NcSeries<PAdic>> {
    from.validate(config)?;
    to.validate(config)?;
    let p = config.p;
    let disc = from.disc(config);
    if disc != to.disc(config) {
        return Err(Error::NotSameDisc);
    }
    let center = match disc {
        Disc::Marked(i) => Center::Marked(i),
        Disc::Good(Residue::Infinity) => Center::Infinity,
        Disc::Good(Residue::Finite(_)) => match (from, to) {
            (FibreFunctorSpec::Point(z), _) => Center::Finite(z.clone()),
            _ => unreachable!("tangential specs live in marked discs"),
        },
    };
    let n = config.weight;
    let mut evals: Vec<(Option<PAdic>, PAdic)> = Vec::new();
    let mut e_min = i64::MAX;
    for spec in [from, to] {
        match spec {
            FibreFunctorSpec::Point(z) => {
                let t = coordinate(config, &center, z)?;
                if t.is_exact_zero() || t.is_zero() {
                    evals.push((None, PAdic::zero(p)));
                    continue;
                }
                if t.valuation() < 1 {
                    return Err(Error::NotSameDisc);
                }
                e_min = e_min.min(t.valuation());
                let ell = if matches!(center, Center::Marked(_)) { log_branch(&t, branch)? } else { PAdic::zero(p) };
                evals.push((Some(t), ell));
            }
            FibreFunctorSpec::Tangential { xi, .. } => {
                evals.push((None, log_branch(xi, branch)?));
            }
        }
    }
    let e = if e_min == i64::MAX { 1 } else { e_min };
    let slack = n as i64 * (floor_log(p, (prec as u64 + 8) * 4) + 1) + 4;
    // only constant terms are read when both ends are tangential
    let order = if e_min == i64::MAX { 1 } else { LogSeries::order_for(p, n, e, prec + slack) };
    let work = prec + slack + n as i64 * floor_log(p, order as u64) + 4;
    let g = local_fundamental_solution(config, &center, order, work)?;
    let g_from = eval_solution(&g, evals[0].0.as_ref(), &evals[0].1)?;
    let g_to = eval_solution(&g, evals[1].0.as_ref(), &evals[1].1)?;
    Ok(g_to.mul(&g_from.inverse()?))
}

/// Scaling of a tangent vector by a lift `phi(x) = c + f0 (x - c)^p`:
/// returns `(lambda, phi_T(xi))` with `lambda = xi / phi_T(xi)`.
pub fn tangential_frobenius_scale(config: &DivisorConfig, point: usize, xi: &PAdic, lift: &crate::frobenius::FrobeniusLift) -> Result<(PAdic, PAdic)> {
    let p = config.p;
    let prec = xi.n_abs().min(xi.valuation() + 64).max(1);
    let f0 = PAdic::from_rational(p, lift.f0(), prec)?;
    let f_at = match &config.points[point] {
        MarkedPoint::Infinity => f0.inv()?,
        MarkedPoint::Finite(q) if q == lift.center() => f0,
        MarkedPoint::Finite(q) => {
            return Err(Error::LiftConditionViolated(format!("lift centred at {} does not fix {} to order p", lift.center(), q)));
        }
    };
    let phi_t = &xi.pow(p as u32) * &f_at;
    let lambda = xi.div(&phi_t)?;
    Ok((lambda, phi_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    #[test]
    fn config_validation() {
        assert!(DivisorConfig::mzv(5, 4).is_ok());
        let pts = vec![MarkedPoint::Infinity, MarkedPoint::Finite(BigRational::from_integer(0.into())), MarkedPoint::Finite(BigRational::from_integer(5.into()))];
        assert!(matches!(DivisorConfig::new(5, pts, 3), Err(Error::InvalidInput(_))));
        assert!(DivisorConfig::mzv(6, 3).is_err());
        let c = DivisorConfig::from_json(r#"{"p":7,"points":["inf","0","1"],"N":3}"#).unwrap();
        assert_eq!(c.letters(), 2);
        assert_eq!(c.signs(), &[1, -1]);
    }

    #[test]
    fn forms_for_mzv() {
        let c = DivisorConfig::mzv(5, 3).unwrap();
        assert_eq!(c.form_terms(0), vec![(1, 1)]);
        assert_eq!(c.form_terms(1), vec![(-1, 2)]);
        // kappa_B = dx/(1-x) = sum t^n dt at 0
        let f = local_form(&c, 1, &Center::Marked(1), 6, 10).unwrap();
        assert!(f.residue.is_exact_zero());
        for r in &f.regular {
            assert!(r.agreement(&PAdic::one(5, 10)) >= 10);
        }
        let g = local_form(&c, 0, &Center::Marked(0), 4, 10).unwrap();
        assert!(g.residue.agreement(&PAdic::from_i64(5, -1, 10)) >= 10);
    }

    #[test]
    fn tiny_transport_polylogs() {
        let p = 5;
        let prec = 10;
        let c = DivisorConfig::mzv(p, 3).unwrap();
        let from = FibreFunctorSpec::tangential(1, p, prec + 5);
        let to = FibreFunctorSpec::Point(PAdic::from_i64(p, 5, prec + 5));
        let g = tiny_transport(&c, &from, &to, &PAdic::zero(p), prec).unwrap();
        let alpha = c.alphabet();
        for k in 1..=3u32 {
            let w = Word::parse(&format!("{}B", "A".repeat(k as usize - 1)), &alpha).unwrap();
            let mut o = BigRational::zero();
            for n in 1..60u32 {
                o += BigRational::new(BigInt::from(5).pow(n), BigInt::from(n).pow(k));
            }
            let oracle = PAdic::from_rational(p, &o, prec).unwrap();
            assert!(g.coeff(&w).unwrap().agreement(&oracle) >= prec, "k={k}");
        }
        let a = g.coeff(&Word::parse("A", &alpha).unwrap()).cloned().unwrap_or(PAdic::zero(p));
        assert!(a.is_zero());
    }

    #[test]
    fn transport_across_discs_rejected() {
        let p = 5;
        let c = DivisorConfig::mzv(p, 2).unwrap();
        let from = FibreFunctorSpec::tangential(1, p, 10);
        let to = FibreFunctorSpec::Point(PAdic::from_i64(p, 2, 10));
        assert!(matches!(tiny_transport(&c, &from, &to, &PAdic::zero(p), 8), Err(Error::NotSameDisc)));
    }
}
