use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::gauge::GaugeOptions;
use super::paths::{path_via, solve_charts, with_precision, Chart, Waypoint};
use super::{audit_correction, FrobeniusLift};
use crate::connection::{is_prime, DivisorConfig, FibreFunctorSpec, MarkedPoint};
use crate::error::{Error, Result};
use crate::freealg::{is_group_like, GroupLikeReport, NcSeries, Word};
use crate::padic::{dp_ideal_valuation, PAdic};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub p: u64,
    pub weight: usize,
    pub prec: i64,
    /// Laurent truncation order; automatic when absent.
    pub order: Option<usize>,
    pub waypoint: Option<Waypoint>,
    /// The branch `log(p) = a`.
    pub branch: BigRational,
}

impl RunConfig {
    pub fn new(p: u64, weight: usize, prec: i64) -> RunConfig {
        RunConfig { p, weight, prec, order: None, waypoint: None, branch: BigRational::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::InvalidInput(format!("{} is not prime", self.p)));
        }
        if self.weight == 0 {
            return Err(Error::InvalidInput("weight must be at least 1".into()));
        }
        if self.prec < self.weight as i64 + 2 {
            return Err(Error::InvalidInput(format!("precision must be at least N + 2 = {}", self.weight + 2)));
        }
        if let Some(t) = self.order {
            if t < self.p as usize * self.weight {
                return Err(Error::InvalidInput(format!("series order must be at least p N = {}", self.p as usize * self.weight)));
            }
        }
        let a = PAdic::from_rational(self.p, &self.branch, 4)?;
        if a.valuation() < 1 {
            return Err(Error::InvalidInput("branch a must lie in p Z_p".into()));
        }
        Ok(())
    }
}

/// Where a coefficient stands against the divided-power bound of its weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Margin {
    /// Valuation minus the bound (a lower bound when the value is zero to
    /// its precision).
    Finite(i64),
    Infinite,
    Indeterminate,
}

impl Margin {
    pub fn passes(&self) -> bool {
        match self {
            Margin::Finite(m) => *m >= 0,
            Margin::Infinite => true,
            Margin::Indeterminate => false,
        }
    }

    fn worse(self, o: Margin) -> Margin {
        match (self, o) {
            (Margin::Indeterminate, _) | (_, Margin::Indeterminate) => Margin::Indeterminate,
            (Margin::Infinite, x) | (x, Margin::Infinite) => x,
            (Margin::Finite(a), Margin::Finite(b)) => Margin::Finite(a.min(b)),
        }
    }

    pub fn of(c: &PAdic, threshold: i64) -> Margin {
        if c.is_exact_zero() {
            Margin::Infinite
        } else if c.is_zero() {
            if c.n_abs() >= threshold { Margin::Finite(c.n_abs() - threshold) } else { Margin::Indeterminate }
        } else {
            Margin::Finite(c.valuation() - threshold)
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralityLine {
    pub word: String,
    pub weight: usize,
    pub valuation: Option<i64>,
    pub n_abs: Option<i64>,
    pub threshold: i64,
    pub margin: Margin,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralityReport {
    pub p: u64,
    pub lines: Vec<IntegralityLine>,
    pub by_weight: BTreeMap<usize, Margin>,
    pub passed: bool,
}

/// Margins `v(c_w) - dp(|w|)` for every word up to the truncation weight.
pub fn integrality_report(g: &NcSeries<PAdic>, p: u64, alphabet: &[char]) -> IntegralityReport {
    let mut lines = Vec::new();
    let mut by_weight = BTreeMap::new();
    let exact_zero = PAdic::zero(p);
    for w in 0..=g.weight() {
        let threshold = dp_ideal_valuation(w as u64, p);
        let mut worst = Margin::Infinite;
        for word in Word::all_of_weight(g.letters(), w) {
            let c = g.coeff(&word).unwrap_or(&exact_zero);
            let margin = Margin::of(c, threshold);
            worst = worst.worse(margin);
            lines.push(IntegralityLine {
                word: word.render(alphabet),
                weight: w,
                valuation: if c.is_zero() { None } else { Some(c.valuation()) },
                n_abs: if c.is_exact_zero() { None } else { Some(c.n_abs()) },
                threshold,
                margin,
            });
        }
        by_weight.insert(w, worst);
    }
    let passed = by_weight.values().all(|m| m.passes());
    IntegralityReport { p, lines, by_weight, passed }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssociatorAudits {
    /// Digits beyond `prec` to which the shuffle relations hold.
    pub group_like_margin: i64,
    /// Digits to which the single-letter coefficients vanish.
    pub letters_vanish: i64,
    /// Digits of agreement with a recomputation through the point `1/p`
    /// with branch `a + p`.
    pub branch_agreement: i64,
    pub gauge_residual: i64,
    pub gauge_order: usize,
    /// `min v(M_w(y)) - (dp(w) - w)` over both charts at the waypoint.
    pub lattice_margin: i64,
    pub symbolic: bool,
    pub integrality_margins: BTreeMap<usize, Margin>,
}

#[derive(Clone, Debug)]
pub struct Associator {
    pub p: u64,
    pub weight: usize,
    pub prec: i64,
    pub branch: BigRational,
    pub waypoint: Waypoint,
    pub lifts: Vec<String>,
    /// Coefficients `(-1)^|w|` times the iterated integrals of
    /// `omega_A = -dx/x`, `omega_B = dx/(1-x)`.
    pub value: NcSeries<PAdic>,
    pub audits: AssociatorAudits,
}

#[derive(Serialize, Deserialize)]
struct AssociatorJson {
    p: u64,
    #[serde(rename = "N")]
    n: usize,
    prec: i64,
    a: String,
    waypoint: String,
    lifts: Vec<String>,
    coefficients: BTreeMap<String, PAdic>,
    audits: AssociatorAudits,
}

impl Associator {
    pub fn coeff(&self, w: &str) -> Result<PAdic> {
        let word = Word::parse(w, &['A', 'B'])?;
        if word.len() > self.weight {
            return Err(Error::WeightExceeded(self.weight));
        }
        Ok(self.value.coeff(&word).cloned().unwrap_or_else(|| PAdic::zero(self.p)))
    }

    pub fn to_json(&self) -> String {
        let coefficients = self.value.terms().map(|(w, c)| (w.render(&['A', 'B']), c.clone())).collect();
        let j = AssociatorJson {
            p: self.p,
            n: self.weight,
            prec: self.prec,
            a: self.branch.to_string(),
            waypoint: self.waypoint.to_string(),
            lifts: self.lifts.clone(),
            coefficients,
            audits: self.audits.clone(),
        };
        serde_json::to_string_pretty(&j).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Associator> {
        let j: AssociatorJson = serde_json::from_str(s).map_err(|e| Error::Cache(e.to_string()))?;
        let mut value = NcSeries::zero(2, j.n);
        for (w, c) in j.coefficients {
            value.set(Word::parse(&w, &['A', 'B'])?, c)?;
        }
        Ok(Associator {
            p: j.p,
            weight: j.n,
            prec: j.prec,
            branch: j.a.parse().map_err(|_| Error::Cache("bad branch".into()))?,
            waypoint: Waypoint::parse(&j.waypoint)?,
            lifts: j.lifts,
            value,
            audits: j.audits,
        })
    }

    pub fn integrality(&self) -> IntegralityReport {
        integrality_report(&self.value, self.p, &['A', 'B'])
    }
}

/// Internal coefficients use `kappa_i = -sign_i omega_i` and `dG = Omega G`;
/// the reported ones carry the extra `(-1)^|w|` of iterated integrals of the
/// `omega_i`, so the two differ by the product of the letter signs.
pub fn to_form_signs(config: &DivisorConfig, g: &NcSeries<PAdic>) -> NcSeries<PAdic> {
    let mut out = NcSeries::zero(g.letters(), g.weight());
    for (w, c) in g.terms() {
        let s: i64 = w.0.iter().map(|&i| config.signs()[i as usize]).product();
        out.set(w.clone(), c.scale_int(s)).expect("same weight");
    }
    out
}

fn lattice_margin(chart: &Chart, y: &FibreFunctorSpec, p: u64) -> Result<i64> {
    let m = match y {
        FibreFunctorSpec::Point(z) => chart.gauge().value_at(z)?,
        FibreFunctorSpec::Tangential { .. } => chart.gauge().value_at_infinity()?,
    };
    let mut worst = i64::MAX;
    for (w, c) in m.terms() {
        if w.is_empty() {
            continue;
        }
        let bound = dp_ideal_valuation(w.len() as u64, p) - w.len() as i64;
        let v = if c.is_zero() { c.n_abs() } else { c.valuation() };
        worst = worst.min(v - bound);
    }
    Ok(worst)
}

fn agreement(a: &NcSeries<PAdic>, b: &NcSeries<PAdic>) -> i64 {
    let d = a.sub(b);
    d.terms().map(|(_, c)| if c.is_exact_zero() { i64::MAX } else { c.valuation() }).min().unwrap_or(i64::MAX)
}

/// Path between the standard tangent vectors at two finite marked points,
/// with the letter signs of the configuration's forms.
pub fn marked_path(config: &DivisorConfig, from: usize, to: usize, run: &RunConfig) -> Result<NcSeries<PAdic>> {
    let p = config.p();
    let n = config.weight() as i64;
    for i in [from, to] {
        if !matches!(config.points().get(i), Some(MarkedPoint::Finite(_))) {
            return Err(Error::InvalidInput("marked_path joins finite marked points".into()));
        }
    }
    let waypoint = run.waypoint.clone().unwrap_or_else(|| Waypoint::default_for(config));
    let (g, _) = with_precision(run.prec, 2 * n + 4, |work| {
        let charts = solve_charts(config, from, to, &GaugeOptions { prec: work, order: run.order })?;
        let branch = PAdic::from_rational(p, &run.branch, work)?;
        let y = waypoint.spec(config, work)?;
        let a = FibreFunctorSpec::tangential(from, p, work);
        let b = FibreFunctorSpec::tangential(to, p, work);
        Ok((path_via(config, &charts, &a, &b, &y, &branch, work)?, ()))
    })?;
    Ok(to_form_signs(config, &g))
}

/// The associator: the invariant path from the tangent vector at 0 to the
/// one at 1 on `P^1 - {0, 1, inf}`, with its audits.
pub fn associator(run: &RunConfig) -> Result<Associator> {
    run.validate()?;
    let p = run.p;
    let n = run.weight;
    let config = DivisorConfig::mzv(p, n)?;
    let waypoint = run.waypoint.clone().unwrap_or_else(|| Waypoint::default_for(&config));
    let (value, (audits, lifts)) = with_precision(run.prec, 2 * n as i64 + 4, |work| {
        let charts = solve_charts(&config, 1, 2, &GaugeOptions { prec: work, order: run.order })?;
        let branch = PAdic::from_rational(p, &run.branch, work)?;
        let y = waypoint.spec(&config, work)?;
        let a = FibreFunctorSpec::tangential(1, p, work);
        let b = FibreFunctorSpec::tangential(2, p, work);
        let phi = path_via(&config, &charts, &a, &b, &y, &branch, work)?;

        // the point 1/p lies in the disc of infinity, where the branch enters
        let bad = Waypoint::Point(BigRational::new(BigInt::one(), BigInt::from(p))).spec(&config, work)?;
        let other = &branch + &PAdic::from_i64(p, p as i64, work);
        let phi_b = path_via(&config, &charts, &a, &b, &bad, &other, work)?;

        let value = to_form_signs(&config, &phi);
        let gl: GroupLikeReport = is_group_like(&value, p, run.prec);
        let letters = (0..2u8).map(|i| value.coeff(&Word::letter(i)).map(|c| if c.is_zero() { c.n_abs() } else { c.valuation() }).unwrap_or(i64::MAX)).min().unwrap();
        let lattice = lattice_margin(&charts.0, &y, p)?.min(lattice_margin(&charts.1, &y, p)?);
        let lifts: Vec<FrobeniusLift> = vec![charts.0.lift().clone(), charts.1.lift().clone()];
        let symbolic = lifts.iter().all(|l| l.check().is_ok() && (0..2).all(|j| audit_correction(&config, l, j)));
        let audits = AssociatorAudits {
            group_like_margin: gl.worst_valuation.min(work) - run.prec,
            letters_vanish: letters.min(work),
            branch_agreement: agreement(&phi, &phi_b).min(work),
            gauge_residual: charts.0.gauge().residual_digits().min(charts.1.gauge().residual_digits()),
            gauge_order: charts.0.gauge().order().max(charts.1.gauge().order()),
            lattice_margin: lattice,
            symbolic,
            integrality_margins: BTreeMap::new(),
        };
        Ok((value, (audits, lifts.iter().map(|l| l.to_string()).collect::<Vec<_>>())))
    })?;
    let mut out = Associator { p, weight: n, prec: run.prec, branch: run.branch.clone(), waypoint, lifts, value, audits };
    out.audits.integrality_margins = out.integrality().by_weight;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct MzvValue {
    pub indices: Vec<u32>,
    pub value: PAdic,
    pub valuation: Option<i64>,
    pub threshold: i64,
    pub margin: Margin,
    /// Whether the leading index is at least 2; other values are the
    /// regularized ones.
    pub convergent: bool,
}

/// `zeta_p(k_1, ..., k_m) = (-1)^m <Phi, A^(k_m - 1) B ... A^(k_1 - 1) B>`.
pub fn pmzv(phi: &Associator, indices: &[u32]) -> Result<MzvValue> {
    if indices.is_empty() || indices.contains(&0) {
        return Err(Error::InvalidInput("indices must be positive".into()));
    }
    let weight: usize = indices.iter().map(|&k| k as usize).sum();
    if weight > phi.weight {
        return Err(Error::WeightExceeded(phi.weight));
    }
    let mut word = Vec::with_capacity(weight);
    for &k in indices.iter().rev() {
        word.extend(std::iter::repeat(0u8).take(k as usize - 1));
        word.push(1);
    }
    let c = phi.value.coeff(&Word(word)).cloned().unwrap_or_else(|| PAdic::zero(phi.p));
    let value = if indices.len() % 2 == 1 { -&c } else { c };
    let threshold = dp_ideal_valuation(weight as u64, phi.p);
    Ok(MzvValue {
        indices: indices.to_vec(),
        valuation: if value.is_zero() { None } else { Some(value.valuation()) },
        margin: Margin::of(&value, threshold),
        threshold,
        convergent: *indices.last().unwrap() >= 2,
        value,
    })
}
