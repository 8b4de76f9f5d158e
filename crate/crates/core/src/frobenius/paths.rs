use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gauge::{solve_gauge, FrobeniusGauge, GaugeOptions};
use super::FrobeniusLift;
use crate::connection::{tangential_frobenius_scale, tiny_transport, Disc, DivisorConfig, FibreFunctorSpec, MarkedPoint, Residue};
use crate::error::{Error, Result};
use crate::freealg::{NcSeries, Word};
use crate::padic::{teichmuller, PAdic};

/// Point at which the two charts of a path are joined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Waypoint {
    Teichmuller(i64),
    Point(BigRational),
    TangentialInfinity,
}

impl Waypoint {
    /// `omega(c)`, `teich:c`, `inf`, or a rational number.
    pub fn parse(s: &str) -> Result<Waypoint> {
        let t = s.trim();
        let bad = || Error::InvalidInput(format!("bad waypoint {s:?}"));
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Waypoint::TangentialInfinity);
        }
        let inner = t
            .strip_prefix("omega(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| t.strip_prefix("teich:"));
        if let Some(c) = inner {
            return c.trim().parse::<i64>().map(Waypoint::Teichmuller).map_err(|_| bad());
        }
        t.parse::<BigRational>().map(Waypoint::Point).map_err(|_| bad())
    }

    /// Teichmuller lift of the smallest unmarked residue; the tangent vector
    /// `1/x` at infinity when every finite residue is marked.
    pub fn default_for(config: &DivisorConfig) -> Waypoint {
        let p = config.p();
        let marked: Vec<Residue> = (0..config.points().len()).map(|i| config.residue_of_marked(i)).collect();
        for r in 0..p {
            if !marked.contains(&Residue::Finite(r)) {
                return if r == 0 { Waypoint::Point(BigRational::zero()) } else { Waypoint::Teichmuller(r as i64) };
            }
        }
        if marked.contains(&Residue::Infinity) {
            Waypoint::TangentialInfinity
        } else {
            Waypoint::Point(BigRational::new(BigInt::one(), BigInt::from(p)))
        }
    }

    pub fn spec(&self, config: &DivisorConfig, prec: i64) -> Result<FibreFunctorSpec> {
        let p = config.p();
        match self {
            Waypoint::Teichmuller(c) => Ok(FibreFunctorSpec::Point(teichmuller(*c, p, prec)?)),
            Waypoint::Point(q) => Ok(FibreFunctorSpec::Point(PAdic::from_rational(p, q, prec)?)),
            Waypoint::TangentialInfinity => match config.index_of(&MarkedPoint::Infinity) {
                Some(i) => Ok(FibreFunctorSpec::tangential(i, p, prec)),
                None => Err(Error::InvalidInput("infinity is not a marked point".into())),
            },
        }
    }
}

impl fmt::Display for Waypoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Waypoint::Teichmuller(c) => write!(f, "omega({c})"),
            Waypoint::Point(q) => write!(f, "{q}"),
            Waypoint::TangentialInfinity => write!(f, "inf"),
        }
    }
}

/// A Frobenius lift around one finite marked point and its solved gauge.
#[derive(Clone, Debug)]
pub struct Chart {
    gauge: FrobeniusGauge,
}

impl Chart {
    pub fn new(config: &DivisorConfig, point: usize, opts: &GaugeOptions) -> Result<Chart> {
        let lift = FrobeniusLift::standard(config, point)?;
        Ok(Chart { gauge: solve_gauge(config, &lift, opts)? })
    }

    pub fn from_gauge(gauge: FrobeniusGauge) -> Chart {
        Chart { gauge }
    }

    pub fn gauge(&self) -> &FrobeniusGauge {
        &self.gauge
    }

    pub fn lift(&self) -> &FrobeniusLift {
        self.gauge.lift()
    }

    pub fn point(&self) -> usize {
        self.lift().point()
    }
}

/// `outer` after `inner`.
pub fn compose_paths(outer: &NcSeries<PAdic>, inner: &NcSeries<PAdic>) -> NcSeries<PAdic> {
    outer.mul(inner)
}

/// Solves `G = K tau(G)`, where `tau` multiplies weight `w` by `p^w`.
/// The weight-`w` unknown appears with coefficient `1 - p^w`.
pub fn solve_functional_equation(k: &NcSeries<PAdic>, images: &[NcSeries<PAdic>], p: u64) -> Result<NcSeries<PAdic>> {
    let prec = k.min_precision();
    let one = PAdic::one(p, prec);
    let s = k.letters();
    let n = k.weight();
    let k0 = k.coeff(&Word::empty()).cloned().unwrap_or_else(|| PAdic::zero(p));
    if (&k0 - &one).valuation() < prec || images.len() != s {
        return Err(Error::AuditFailed("functional equation is not contracting".into()));
    }
    // the weight w part of F(G) is p^w G_w plus terms from lower weights
    let pv = PAdic::from_i64(p, p as i64, prec);
    for (j, img) in images.iter().enumerate() {
        for i in 0..s {
            let c = img.coeff(&Word::letter(i as u8)).cloned().unwrap_or_else(|| PAdic::zero(p));
            let want = if i == j { pv.clone() } else { PAdic::zero(p) };
            if img.coeff(&Word::empty()).is_some_and(|c| !c.is_zero()) || (&c - &want).valuation() < prec {
                return Err(Error::AuditFailed("fibre Frobenius is not p on the letters".into()));
            }
        }
    }
    let words = frobenius_of_words(images, s, n, &one);
    let mut g = NcSeries::identity(s, n, one.clone());
    let mut fg = NcSeries::identity(s, n, one.clone());
    for w in 1..=n {
        let scale = (&one - &one.shift(w as i64)).inv()?;
        for word in Word::all_of_weight(s, w) {
            let mut acc = PAdic::zero(p);
            for cut in 0..=w {
                let (Some(ku), Some(fv)) = (k.coeff(&Word(word.0[..cut].to_vec())), fg.coeff(&Word(word.0[cut..].to_vec()))) else { continue };
                acc = &acc + &(ku * fv);
            }
            g.set(word, &acc * &scale)?;
        }
        for word in Word::all_of_weight(s, w) {
            if let Some(c) = g.coeff(&word) {
                fg = fg.add(&words[&word].scale(c));
            }
        }
    }
    // residual of the equation itself
    let r = g.sub(&k.mul(&fg));
    for (_, c) in r.terms() {
        if !c.is_zero() {
            return Err(Error::AuditFailed(format!("functional equation residual has valuation {}", c.valuation())));
        }
    }
    Ok(g)
}

// F(e_w) for every word, F being multiplicative
fn frobenius_of_words(images: &[NcSeries<PAdic>], s: usize, n: usize, one: &PAdic) -> BTreeMap<Word, NcSeries<PAdic>> {
    let mut out = BTreeMap::new();
    out.insert(Word::empty(), NcSeries::identity(s, n, one.clone()));
    for w in 1..=n {
        for word in Word::all_of_weight(s, w) {
            let tail = &out[&Word(word.0[1..].to_vec())];
            let v = images[word.0[0] as usize].mul(tail);
            out.insert(word, v);
        }
    }
    out
}

fn fixed_point_at(config: &DivisorConfig, chart: &Chart, target: &FibreFunctorSpec, branch: &PAdic, prec: i64) -> Result<NcSeries<PAdic>> {
    let lift = chart.lift();
    let (image, m) = match target {
        FibreFunctorSpec::Point(z) => (FibreFunctorSpec::Point(lift.eval(z)?), chart.gauge.value_at(z)?),
        FibreFunctorSpec::Tangential { point, xi } => {
            let (_, phi_t) = tangential_frobenius_scale(config, *point, xi, lift)?;
            (FibreFunctorSpec::Tangential { point: *point, xi: phi_t }, chart.gauge.value_at_infinity()?)
        }
    };
    let t = tiny_transport(config, target, &image, branch, prec)?;
    let k = t.inverse()?.mul(&m);
    solve_functional_equation(&k, chart.gauge.letter_images(), config.p())
}

/// The Frobenius-invariant path from the chart's tangential base point to
/// `target`.
pub fn invariant_path_in_chart(config: &DivisorConfig, chart: &Chart, target: &FibreFunctorSpec, branch: &PAdic, prec: i64) -> Result<NcSeries<PAdic>> {
    target.validate(config)?;
    let p = config.p();
    let disc = target.disc(config);
    if !chart.lift().valid_on(config, disc) {
        return Err(Error::OutOfDomain(format!("target lies outside the region of {}", chart.lift())));
    }
    match disc {
        Disc::Marked(i) if i == chart.point() => {
            let base = FibreFunctorSpec::tangential(i, p, prec);
            tiny_transport(config, &base, target, branch, prec)
        }
        Disc::Marked(i) => {
            let tan = FibreFunctorSpec::tangential(i, p, prec);
            let g = fixed_point_at(config, chart, &tan, branch, prec)?;
            if let FibreFunctorSpec::Tangential { xi, .. } = target {
                if (xi - &PAdic::one(p, xi.n_abs())).is_zero() {
                    return Ok(g);
                }
            }
            Ok(compose_paths(&tiny_transport(config, &tan, target, branch, prec)?, &g))
        }
        Disc::Good(_) => fixed_point_at(config, chart, target, branch, prec),
    }
}

#[derive(Clone, Debug)]
pub struct PathOptions {
    pub prec: i64,
    pub order: Option<usize>,
    pub branch: BigRational,
    pub waypoint: Option<Waypoint>,
}

fn chart_point(config: &DivisorConfig, spec: &FibreFunctorSpec) -> Result<usize> {
    if let Disc::Marked(i) = spec.disc(config) {
        if let MarkedPoint::Finite(_) = config.point(i) {
            return Ok(i);
        }
    }
    (0..config.points().len())
        .find(|&i| matches!(config.point(i), MarkedPoint::Finite(_)))
        .ok_or_else(|| Error::InvalidInput("no finite marked point".into()))
}

/// Solves the gauges of two charts, concurrently when they differ.
pub(super) fn solve_charts(config: &DivisorConfig, i: usize, j: usize, opts: &GaugeOptions) -> Result<(Chart, Chart)> {
    if i == j {
        let c = Chart::new(config, i, opts)?;
        return Ok((c.clone(), c));
    }
    std::thread::scope(|s| {
        let hi = s.spawn(|| Chart::new(config, i, opts));
        let cj = Chart::new(config, j, opts);
        let ci = hi.join().expect("chart thread panicked");
        Ok((ci?, cj?))
    })
}

/// Path `to <- from` through the two charts, joined at `waypoint`.
pub(super) fn path_via(config: &DivisorConfig, charts: &(Chart, Chart), from: &FibreFunctorSpec, to: &FibreFunctorSpec, waypoint: &FibreFunctorSpec, branch: &PAdic, prec: i64) -> Result<NcSeries<PAdic>> {
    let (ci, cj) = charts;
    let g_from = invariant_path_in_chart(config, ci, from, branch, prec)?;
    let g_to = invariant_path_in_chart(config, cj, to, branch, prec)?;
    if ci.point() == cj.point() {
        return Ok(compose_paths(&g_to, &g_from.inverse()?));
    }
    let yi = invariant_path_in_chart(config, ci, waypoint, branch, prec)?;
    let yj = invariant_path_in_chart(config, cj, waypoint, branch, prec)?;
    let mid = compose_paths(&yj.inverse()?, &yi);
    Ok(compose_paths(&compose_paths(&g_to, &mid), &g_from.inverse()?))
}

/// Runs `f` at increasing working precision until every coefficient of the
/// result carries `prec` digits.
pub(super) fn with_precision<T>(prec: i64, start: i64, mut f: impl FnMut(i64) -> Result<(NcSeries<PAdic>, T)>) -> Result<(NcSeries<PAdic>, T)> {
    let mut extra = start;
    let mut got = 0;
    for _ in 0..3 {
        let (g, t) = f(prec + extra)?;
        got = g.min_precision();
        if got >= prec {
            return Ok((g.map(|c| c.truncate(prec)), t));
        }
        extra += prec - got + 4;
    }
    Err(Error::PrecisionExhausted(format!("reached {got} of {prec} digits")))
}

/// Frobenius-invariant transport `to <- from` between any two fibre functors.
pub fn frobenius_transport(config: &DivisorConfig, from: &FibreFunctorSpec, to: &FibreFunctorSpec, opts: &PathOptions) -> Result<NcSeries<PAdic>> {
    from.validate(config)?;
    to.validate(config)?;
    let p = config.p();
    let i = chart_point(config, from)?;
    let j = chart_point(config, to)?;
    let n = config.weight() as i64;
    with_precision(opts.prec, 2 * n + 4, |work| {
        let charts = solve_charts(config, i, j, &GaugeOptions { prec: work, order: opts.order })?;
        let branch = PAdic::from_rational(p, &opts.branch, work)?;
        let y = opts.waypoint.clone().unwrap_or_else(|| Waypoint::default_for(config)).spec(config, work)?;
        Ok((path_via(config, &charts, from, to, &y, &branch, work)?, ()))
    })
    .map(|(g, _)| g)
}
