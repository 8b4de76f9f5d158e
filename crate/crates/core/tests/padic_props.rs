use num_bigint::BigInt;
use proptest::prelude::*;

use padic_paths::padic::{dp_ideal_valuation, padic_log, teichmuller};
use padic_paths::PAdic;

const PRIMES: [u64; 5] = [2, 3, 5, 7, 11];

fn elem(p: u64) -> impl Strategy<Value = PAdic> {
    (-10_000i64..10_000, 0u32..4, 4i64..30).prop_map(move |(n, k, prec)| {
        let m = BigInt::from(n) * BigInt::from(p).pow(k);
        PAdic::from_int(p, m, prec)
    })
}

fn unit(p: u64) -> impl Strategy<Value = PAdic> {
    (1i64..1_000_000, 4i64..30).prop_filter_map("unit", move |(n, prec)| (n % p as i64 != 0).then(|| PAdic::from_i64(p, n, prec)))
}

fn agree(a: &PAdic, b: &PAdic) -> bool {
    a.agreement(b) >= a.n_abs().min(b.n_abs())
}

// v_p(j!) one factor at a time
fn vfact(p: u64, j: u64) -> i64 {
    (1..=j)
        .map(|mut i| {
            let mut v = 0;
            while i % p == 0 {
                i /= p;
                v += 1;
            }
            v
        })
        .sum()
}

fn dp_oracle(r: u64, p: u64) -> i64 {
    (r..r + 40 * p).map(|j| j as i64 - vfact(p, j)).min().unwrap()
}

proptest! {
    #[test]
    fn ring_laws((x, y, z) in (0usize..5).prop_flat_map(|i| (elem(PRIMES[i]), elem(PRIMES[i]), elem(PRIMES[i])))) {
        prop_assert!(agree(&(&(&x + &y) + &z), &(&x + &(&y + &z))));
        prop_assert!(agree(&(&x * &(&y + &z)), &(&(&x * &y) + &(&x * &z))));
        prop_assert!(agree(&(&(&x * &y) * &z), &(&x * &(&y * &z))));
        prop_assert!(agree(&(&x * &y), &(&y * &x)));
    }

    #[test]
    fn log_is_a_homomorphism(
        (p, x, y) in (0usize..5).prop_flat_map(|i| (Just(PRIMES[i]), unit(PRIMES[i]), unit(PRIMES[i]))),
        k in 0i64..3,
        a in -20i64..20,
    ) {
        // y picks up valuation k, so the branch log(p) = a p enters
        let branch = PAdic::from_i64(p, a * p as i64, 40);
        let y = y.shift(k);
        let lx = padic_log(&x, &branch).unwrap();
        let ly = padic_log(&y, &branch).unwrap();
        let lxy = padic_log(&(&x * &y), &branch).unwrap();
        let d = &lxy - &(&lx + &ly);
        prop_assert!(d.is_zero(), "p={} x={} y={} defect {}", p, x, y, d);
    }

    #[test]
    fn teichmuller_is_fixed_by_frobenius(pi in 0usize..5, c in 1i64..1000, n in 1i64..40) {
        let p = PRIMES[pi];
        prop_assume!(c % p as i64 != 0);
        let w = teichmuller(c, p, n).unwrap();
        prop_assert!(w.pow(p as u32).agreement(&w) >= n);
        prop_assert_eq!(w.residue(), Some((c as u64) % p));
    }

    #[test]
    fn divided_power_ideals(pi in 0usize..4, l in 0u64..25, r in 0u64..25) {
        let p = PRIMES[pi];
        prop_assert!(dp_ideal_valuation(r + 1, p) >= dp_ideal_valuation(r, p));
        prop_assert!(dp_ideal_valuation(l + r, p) <= dp_ideal_valuation(l, p) + dp_ideal_valuation(r, p));
        prop_assert_eq!(dp_ideal_valuation(r, p), dp_oracle(r, p));
    }
}

#[test]
fn named_thresholds_match_legendre() {
    assert_eq!(dp_ideal_valuation(3, 5), dp_oracle(3, 5));
    assert_eq!(dp_ideal_valuation(4, 3), dp_oracle(4, 3));
    for r in 1..20 {
        assert_eq!(dp_ideal_valuation(r, 2), dp_oracle(r, 2));
    }
}
