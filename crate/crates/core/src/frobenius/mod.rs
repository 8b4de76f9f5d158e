//! Frobenius lifts, the comparison gauge between a lift and the connection,
//! Frobenius-invariant paths, and the associator built from two charts.

mod associator;
mod gauge;
mod paths;

pub use associator::{associator, integrality_report, marked_path, pmzv, to_form_signs, Associator, AssociatorAudits, IntegralityLine, IntegralityReport, Margin, MzvValue, RunConfig};
pub use gauge::{solve_gauge, FrobeniusGauge, GaugeOptions};
pub use paths::{compose_paths, frobenius_transport, invariant_path_in_chart, solve_functional_equation, Chart, PathOptions, Waypoint};

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::connection::{Disc, DivisorConfig, MarkedPoint};
use crate::error::{Error, Result};
use crate::padic::{val_int, PAdic};
use crate::rigid::{QPoly, RationalFunction};

fn rational_valuation(p: u64, q: &BigRational) -> i64 {
    if q.is_zero() {
        return i64::MAX;
    }
    val_int(p, q.numer()) - val_int(p, q.denom())
}

/// `phi(x) = c + f0 (x - c)^p` around the finite marked point `c`.
#[derive(Clone, Debug)]
pub struct FrobeniusLift {
    p: u64,
    point: usize,
    center: BigRational,
    f0: BigRational,
}

impl FrobeniusLift {
    /// `x^p` at 0, `1 - (1 - x)^p` at 1, `c + (x - c)^p` elsewhere.
    pub fn standard(config: &DivisorConfig, point: usize) -> Result<FrobeniusLift> {
        let center = match config.points().get(point) {
            Some(MarkedPoint::Finite(c)) => c.clone(),
            _ => return Err(Error::InvalidInput("a chart needs a finite marked point".into())),
        };
        let f0 = if center.is_one() && config.p() % 2 == 0 { -BigRational::one() } else { BigRational::one() };
        FrobeniusLift::with_scale(config, point, f0)
    }

    pub fn with_scale(config: &DivisorConfig, point: usize, f0: BigRational) -> Result<FrobeniusLift> {
        let center = match config.points().get(point) {
            Some(MarkedPoint::Finite(c)) => c.clone(),
            _ => return Err(Error::InvalidInput("a chart needs a finite marked point".into())),
        };
        let lift = FrobeniusLift { p: config.p(), point, center, f0 };
        lift.check()?;
        Ok(lift)
    }

    pub fn point(&self) -> usize {
        self.point
    }

    pub fn center(&self) -> &BigRational {
        &self.center
    }

    pub fn f0(&self) -> &BigRational {
        &self.f0
    }

    pub fn as_poly(&self) -> QPoly {
        let x = QPoly::linear(&self.center);
        x.pow(self.p as u32).scale(&self.f0).add(&QPoly::constant(self.center.clone()))
    }

    pub fn eval(&self, z: &PAdic) -> Result<PAdic> {
        let prec = z.n_abs().min(z.valuation().clamp(0, 64) * self.p as i64 + 64).max(1) + 2;
        let c = PAdic::from_rational(self.p, &self.center, prec)?;
        let f0 = PAdic::from_rational(self.p, &self.f0, prec)?;
        Ok(&c + &(&f0 * &(z - &c).pow(self.p as u32)))
    }

    /// Symbolic checks: `phi = x^p mod p` coefficientwise and `phi - c`
    /// vanishes to order exactly `p` at `c`.
    pub fn check(&self) -> Result<()> {
        let p = self.p;
        let phi = self.as_poly();
        let xp = QPoly::linear(&BigRational::zero()).pow(p as u32);
        for c in phi.sub(&xp).0.iter() {
            if rational_valuation(p, c) < 1 {
                return Err(Error::LiftConditionViolated(format!("{self} does not reduce to x^p")));
            }
        }
        if rational_valuation(p, &self.f0) != 0 || rational_valuation(p, &(&self.f0 - BigRational::one())) < 1 {
            return Err(Error::LiftConditionViolated(format!("{self}: scale must be 1 mod p")));
        }
        let r = phi.sub(&QPoly::constant(self.center.clone())).root_order(&self.center);
        if r != p as usize {
            return Err(Error::LiftConditionViolated(format!("{self} fixes {} to order {r}", self.center)));
        }
        Ok(())
    }

    /// Whether the lift is usable on a residue disc: its own disc, infinity,
    /// and unmarked discs.
    pub fn valid_on(&self, config: &DivisorConfig, disc: Disc) -> bool {
        match disc {
            Disc::Good(_) => true,
            Disc::Marked(i) => i == self.point || config.point(i) == &MarkedPoint::Infinity,
        }
    }

    /// `(phi - b) / (x - b)^p`, whose logarithm corrects `dlog(x - b)`.
    pub fn unit_factor(&self, b: &BigRational) -> RationalFunction {
        let num = self.as_poly().sub(&QPoly::constant(b.clone()));
        RationalFunction::new(num, QPoly::linear(b).pow(self.p as u32))
    }
}

impl fmt::Display for FrobeniusLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.f0.is_one() {
            write!(f, "phi(t) = {} + (t - {})^{}", self.center, self.center, self.p)
        } else {
            write!(f, "phi(t) = {} + ({})(t - {})^{}", self.center, self.f0, self.center, self.p)
        }
    }
}

/// `phi^* kappa_letter - p kappa_letter = sum c dlog(F_b)` as `(c, b)` pairs,
/// `F_b` the unit factor at `b`. Empty when the form scales exactly.
pub fn correction_terms(config: &DivisorConfig, lift: &FrobeniusLift, letter: usize) -> Vec<(i64, BigRational)> {
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for (c, b) in config.form_terms(letter) {
        if b != lift.point {
            *acc.entry(b).or_insert(0) += c;
        }
    }
    acc.into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|(b, c)| match config.point(b) {
            MarkedPoint::Finite(q) => (c, q.clone()),
            MarkedPoint::Infinity => unreachable!("form terms are finite"),
        })
        .collect()
}

/// The rational unit `q` with `dlog q = phi^* kappa - p kappa`.
pub fn correction_unit(config: &DivisorConfig, lift: &FrobeniusLift, letter: usize) -> RationalFunction {
    let mut q = RationalFunction::new(QPoly::constant(BigRational::one()), QPoly::constant(BigRational::one()));
    for (c, b) in correction_terms(config, lift, letter) {
        let f = lift.unit_factor(&b);
        let f = if c > 0 { f } else { f.inverse() };
        for _ in 0..c.abs() {
            q = q.mul(&f);
        }
    }
    q
}

/// Exact check of `dlog(q) = phi^* kappa - p kappa` as rational 1-forms,
/// with `phi^* (dx / (x - b)) = phi' dx / (phi - b)`.
pub fn audit_correction(config: &DivisorConfig, lift: &FrobeniusLift, letter: usize) -> bool {
    let phi = lift.as_poly();
    let dphi = phi.derivative();
    let one = QPoly::constant(BigRational::one());
    let mut rhs = RationalFunction::new(QPoly::zero(), one.clone());
    for (c, b) in config.form_terms(letter) {
        let MarkedPoint::Finite(q) = config.point(b) else { continue };
        let c = BigRational::from_integer(c.into());
        let pulled = RationalFunction::new(dphi.clone(), phi.sub(&QPoly::constant(q.clone())));
        let scaled = RationalFunction::new(QPoly::constant(BigRational::from_integer(lift.p.into())), QPoly::linear(q));
        rhs = rhs.add(&pulled.scale(&c)).add(&scaled.scale(&-c));
    }
    let lhs = correction_unit(config, lift, letter).dlog();
    lhs.same_as(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_lifts() {
        for p in [2u64, 3, 5, 7] {
            let c = DivisorConfig::mzv(p, 2).unwrap();
            let l0 = FrobeniusLift::standard(&c, 1).unwrap();
            let l1 = FrobeniusLift::standard(&c, 2).unwrap();
            // 1 - (1 - x)^p
            let one = QPoly::constant(BigRational::one());
            let mirror = one.sub(&one.sub(&QPoly::linear(&BigRational::zero())).pow(p as u32));
            assert_eq!(l1.as_poly(), mirror);
            assert_eq!(l0.as_poly(), QPoly::linear(&BigRational::zero()).pow(p as u32));
            assert!(FrobeniusLift::standard(&c, 0).is_err());
        }
    }

    #[test]
    fn bad_lift_rejected() {
        let c = DivisorConfig::mzv(5, 2).unwrap();
        let r = FrobeniusLift::with_scale(&c, 1, BigRational::from_integer(2.into()));
        assert!(matches!(r, Err(Error::LiftConditionViolated(_))));
    }

    #[test]
    fn corrections_for_mzv() {
        let c = DivisorConfig::mzv(5, 2).unwrap();
        let l0 = FrobeniusLift::standard(&c, 1).unwrap();
        assert!(correction_terms(&c, &l0, 0).is_empty());
        assert_eq!(correction_terms(&c, &l0, 1), vec![(-1, BigRational::one())]);
        // q_B = (x - 1)^5 / (x^5 - 1)
        let q = correction_unit(&c, &l0, 1);
        let expect = RationalFunction::new(QPoly::from_ints(&[-1, 1]).pow(5), QPoly::from_ints(&[-1, 0, 0, 0, 0, 1]));
        assert!(q.same_as(&expect));
        for l in 0..2 {
            assert!(audit_correction(&c, &l0, l));
            let l1 = FrobeniusLift::standard(&c, 2).unwrap();
            assert!(audit_correction(&c, &l1, l));
        }
    }
}
