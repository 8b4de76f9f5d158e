use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use padic_paths::connection::{DivisorConfig, FibreFunctorSpec, MarkedPoint};
use padic_paths::freealg::{is_group_like, NcSeries, Word};
use padic_paths::frobenius::{associator, integrality_report, marked_path, pmzv, solve_functional_equation, Chart, FrobeniusLift, GaugeOptions, RunConfig, Waypoint};
use padic_paths::padic::{padic_log, teichmuller};
use padic_paths::{Error, PAdic};

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn worst(s: &NcSeries<PAdic>) -> i64 {
    s.terms().map(|(_, c)| if c.is_zero() { c.n_abs() } else { c.valuation() }).min().unwrap_or(i64::MAX)
}

fn letter(i: u8, letters: usize, weight: usize, c: PAdic) -> NcSeries<PAdic> {
    let mut s = NcSeries::zero(letters, weight);
    s.set(Word::letter(i), c).unwrap();
    s
}

#[test]
fn gauge_images_start_with_p() {
    let p = 5;
    let prec = 10;
    let config = DivisorConfig::mzv(p, 4).unwrap();
    for point in [1, 2] {
        let chart = Chart::new(&config, point, &GaugeOptions { prec, order: None }).unwrap();
        let g = chart.gauge();
        assert!(g.residual_digits() >= prec, "residual {}", g.residual_digits());
        let images = g.letter_images();
        assert_eq!(images.len(), 2);
        for (j, img) in images.iter().enumerate() {
            assert!(img.coeff(&Word(vec![])).map_or(true, |c| c.is_zero()));
            for i in 0..2u8 {
                let c = img.coeff(&Word::letter(i)).cloned().unwrap_or_else(|| PAdic::zero(p));
                let want = if i as usize == j { PAdic::from_i64(p, p as i64, prec) } else { PAdic::zero(p) };
                assert!((&c - &want).is_zero(), "chart {point} F(e_{j}) at letter {i}: {c}");
            }
        }
        // the letter of the chart's own point is scaled exactly
        let own = &images[point - 1];
        for (w, c) in own.terms() {
            if w.len() >= 2 {
                assert!(c.is_zero(), "chart {point} {w:?}: {c}");
            }
        }
        let m0 = g.value_at(&config.point_value(point, prec).unwrap()).unwrap();
        let one = NcSeries::identity(2, 4, PAdic::one(p, prec));
        assert!(worst(&m0.sub(&one)) >= prec - 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn functional_equation_is_solved(coeffs in prop::collection::vec(-40i64..40, 30), mix in -5i64..5) {
        let p = 3u64;
        let prec = 20;
        let weight = 4;
        let mut k = NcSeries::identity(2, weight, PAdic::one(p, prec));
        let mut it = coeffs.iter();
        for w in 1..=weight {
            for word in Word::all_of_weight(2, w) {
                if let Some(&c) = it.next() {
                    k.set(word, PAdic::from_i64(p, c, prec)).unwrap();
                }
            }
        }
        // F(e_0) = p e_0 + p^2 mix [e_0, e_1]
        let pv = PAdic::from_i64(p, p as i64, prec);
        let e0 = letter(0, 2, weight, PAdic::one(p, prec));
        let e1 = letter(1, 2, weight, PAdic::one(p, prec));
        let br = e0.mul(&e1).sub(&e1.mul(&e0));
        let f0 = e0.scale(&pv).add(&br.scale(&PAdic::from_i64(p, (p * p) as i64 * mix, prec)));
        let f1 = e1.scale(&pv);
        let g = solve_functional_equation(&k, &[f0.clone(), f1.clone()], p).unwrap();
        // F(g) by substituting the images letter by letter
        let mut fg = NcSeries::zero(2, weight);
        for (w, c) in g.terms() {
            let mut t = NcSeries::identity(2, weight, c.clone());
            for &l in &w.0 {
                t = t.mul(if l == 0 { &f0 } else { &f1 });
            }
            fg = fg.add(&t);
        }
        let d = g.sub(&k.mul(&fg));
        prop_assert!(worst(&d) >= prec - 2 * weight as i64, "defect {}", worst(&d));
    }
}

#[test]
fn duality_and_stuffle_at_p5() {
    let p = 5;
    let prec = 10;
    let phi = associator(&RunConfig::new(p, 4, prec)).unwrap();
    let dual = phi.value.inverse().unwrap().sub(&phi.value.substitute(&[1, 0], &[1, 1]));
    assert!(worst(&dual) >= prec);
    let z12 = pmzv(&phi, &[1, 2]).unwrap();
    let z3 = pmzv(&phi, &[3]).unwrap();
    assert!(z12.convergent && z3.convergent);
    assert!((&z12.value - &z3.value).is_zero(), "{} vs {}", z12.value, z3.value);
    assert!(!z3.value.is_zero());
    assert!(phi.integrality().passed);
    assert!(is_group_like(&phi.value, p, prec).passed);
}

#[test]
fn weight_one_is_a_logarithm() {
    let p = 7;
    let prec = 12;
    let config = DivisorConfig::mzv(p, 2).unwrap();
    let chart = Chart::new(&config, 1, &GaugeOptions { prec: prec + 4, order: None }).unwrap();
    let zero = PAdic::zero(p);
    for c in 2..p as i64 {
        let y = teichmuller(c, p, prec + 4).unwrap();
        let g = padic_paths::frobenius::invariant_path_in_chart(&config, &chart, &FibreFunctorSpec::Point(y.clone()), &zero, prec + 4).unwrap();
        let gb = g.coeff(&Word::letter(1)).unwrap();
        let oracle = -&padic_log(&(&PAdic::one(p, prec + 4) - &y), &zero).unwrap();
        assert!(gb.agreement(&oracle) >= prec, "c={c}: {gb} vs {oracle}");
        let ga = g.coeff(&Word::letter(0)).unwrap();
        let oracle_a = padic_log(&y, &zero).unwrap();
        assert!(ga.agreement(&oracle_a) >= prec, "c={c}: {ga} vs {oracle_a}");
        let hb = chart.gauge().value_at(&y).unwrap().coeff(&Word::letter(1)).unwrap().clone();
        let scaled = hb.div(&PAdic::from_i64(p, 1 - p as i64, prec + 4)).unwrap();
        assert!(gb.agreement(&scaled) >= prec, "c={c}: {gb} vs {scaled}");
    }
}

#[test]
fn waypoints_agree() {
    let p = 7;
    let prec = 10;
    let mut values = Vec::new();
    for w in ["omega(2)", "omega(3)", "omega(5)", "1/7"] {
        let mut run = RunConfig::new(p, 3, prec);
        run.waypoint = Some(Waypoint::parse(w).unwrap());
        values.push(associator(&run).unwrap().value);
    }
    for v in &values[1..] {
        assert!(worst(&v.sub(&values[0])) >= prec);
    }
}

#[test]
fn branches_agree() {
    let p = 3;
    let prec = 10;
    let base = associator(&RunConfig::new(p, 3, prec)).unwrap();
    assert!(base.audits.branch_agreement >= prec);
    for a in [3, -6] {
        let mut run = RunConfig::new(p, 3, prec);
        run.branch = q(a);
        let other = associator(&run).unwrap();
        assert!(worst(&other.value.sub(&base.value)) >= prec, "a = {a}");
    }
}

#[test]
fn custom_configuration_is_integral() {
    let p = 5;
    let prec = 8;
    let points = vec![MarkedPoint::Infinity, MarkedPoint::Finite(q(0)), MarkedPoint::Finite(q(1)), MarkedPoint::Finite(q(-1))];
    let config = DivisorConfig::new(p, points, 3).unwrap();
    let g = marked_path(&config, 1, 2, &RunConfig::new(p, 3, prec)).unwrap();
    assert_eq!(g.letters(), 3);
    assert!(is_group_like(&g, p, prec).passed);
    let r = integrality_report(&g, p, &config.alphabet());
    assert!(r.passed);
    for i in 0..2u8 {
        assert!(g.coeff(&Word::letter(i)).unwrap().is_zero());
    }
    // the letter at -1 integrates dlog(x + 1) from 0 to 1
    let log2 = padic_log(&PAdic::from_i64(p, 2, prec), &PAdic::zero(p)).unwrap();
    let c = g.coeff(&Word::letter(2)).unwrap();
    assert!(c.agreement(&log2) >= prec, "{c} vs {log2}");
}

#[test]
fn bad_lifts_are_rejected() {
    let config = DivisorConfig::mzv(5, 3).unwrap();
    assert!(matches!(FrobeniusLift::standard(&config, 0), Err(Error::InvalidInput(_))));
    assert!(matches!(FrobeniusLift::with_scale(&config, 1, q(2)), Err(Error::LiftConditionViolated(_))));
    assert!(matches!(FrobeniusLift::with_scale(&config, 1, q(5)), Err(Error::LiftConditionViolated(_))));
    assert!(FrobeniusLift::with_scale(&config, 1, q(6)).is_ok());
    let two = DivisorConfig::mzv(2, 3).unwrap();
    assert!(FrobeniusLift::standard(&two, 2).unwrap().check().is_ok());
    let zero = PAdic::zero(5);
    let l = FrobeniusLift::standard(&config, 2).unwrap();
    assert!(l.eval(&zero).unwrap().is_zero());
}
