//! p-adic zeta values against oracles that do not use the path machinery:
//! `zeta_p(k) = p^k / (p^k - 1) L_p(k, omega^(1-k))`, with the Kubota-Leopoldt
//! value from Washington's Bernoulli-sum formula.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use padic_paths::frobenius::{associator, pmzv, RunConfig};
use padic_paths::PAdic;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// B_0, B_1 = -1/2, B_2, ...
fn bernoulli(n: usize) -> Vec<BigRational> {
    let mut b = vec![BigRational::one()];
    for m in 1..=n {
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += q(binom(m as i64 + 1, j as i64)) * bj;
        }
        b.push(-acc / q(m as i64 + 1));
    }
    b
}

fn binom(n: i64, k: i64) -> i64 {
    // generalized, n may be negative
    let mut num = BigRational::one();
    for i in 0..k {
        num = num * q(n - i) / q(i + 1);
    }
    num.to_integer().try_into().unwrap()
}

fn kubota_leopoldt(p: u64, k: i64, terms: usize) -> BigRational {
    let b = bernoulli(terms);
    let f = p as i64;
    let mut total = BigRational::zero();
    for a in 1..f {
        let mut inner = BigRational::zero();
        let ratio = BigRational::new(BigInt::from(f), BigInt::from(a));
        let mut pw = BigRational::one();
        for (j, bj) in b.iter().enumerate() {
            inner += q(binom(1 - k, j as i64)) * bj * &pw;
            pw *= &ratio;
        }
        let ak = BigRational::new(BigInt::one(), BigInt::from(a).pow((k - 1) as u32));
        total += ak * inner;
    }
    total / q(f) / q(k - 1)
}

fn zeta_oracle(p: u64, k: i64, prec: i64) -> PAdic {
    let l = kubota_leopoldt(p, k, (prec + 6) as usize);
    let pk = q(p as i64).pow(k as i32);
    let z = &pk / (&pk - q(1)) * l;
    PAdic::from_rational(p, &z, prec).unwrap()
}

#[test]
fn oracle_vanishes_at_even_arguments() {
    for p in [5u64, 7] {
        for k in [2i64, 4] {
            assert!(zeta_oracle(p, k, 10).is_zero(), "p={p} k={k}");
        }
    }
}

#[test]
fn odd_zeta_values_match_kubota_leopoldt() {
    let p = 5;
    let prec = 10;
    let phi = associator(&RunConfig::new(p, 5, prec)).unwrap();
    for k in [2u32, 4] {
        let z = pmzv(&phi, &[k]).unwrap();
        assert!(z.value.is_zero(), "zeta_5({k}) = {}", z.value);
    }
    for k in [3u32, 5] {
        let z = pmzv(&phi, &[k]).unwrap();
        let oracle = zeta_oracle(p, k as i64, prec);
        assert!(z.value.agreement(&oracle) >= prec, "zeta_5({k}) = {} vs {}", z.value, oracle);
    }
}
