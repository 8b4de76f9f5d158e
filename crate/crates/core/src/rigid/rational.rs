use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Dense polynomial over the rationals, lowest degree first.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct QPoly(pub Vec<BigRational>);

impl QPoly {
    pub fn zero() -> QPoly {
        QPoly(Vec::new())
    }

    pub fn constant(c: BigRational) -> QPoly {
        QPoly(vec![c]).trim()
    }

    pub fn from_ints(c: &[i64]) -> QPoly {
        QPoly(c.iter().map(|&x| BigRational::from_integer(x.into())).collect()).trim()
    }

    /// `x - b`.
    pub fn linear(b: &BigRational) -> QPoly {
        QPoly(vec![-b.clone(), BigRational::one()])
    }

    pub fn trim(mut self) -> QPoly {
        while self.0.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() { None } else { Some(self.0.len() - 1) }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        QPoly((0..n).map(|i| self.0.get(i).unwrap_or(&z) + o.0.get(i).unwrap_or(&z)).collect()).trim()
    }

    pub fn neg(&self) -> QPoly {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &BigRational) -> QPoly {
        QPoly(self.0.iter().map(|c| c * s).collect()).trim()
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly(out).trim()
    }

    pub fn pow(&self, e: u32) -> QPoly {
        let mut acc = QPoly::constant(BigRational::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        QPoly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect()).trim()
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// `self(g(x))`.
    pub fn compose(&self, g: &QPoly) -> QPoly {
        let mut acc = QPoly::zero();
        for c in self.0.iter().rev() {
            acc = acc.mul(g).add(&QPoly::constant(c.clone()));
        }
        acc
    }

    /// Quotient and remainder by `x - b`.
    pub fn div_linear(&self, b: &BigRational) -> (QPoly, BigRational) {
        if self.0.is_empty() {
            return (QPoly::zero(), BigRational::zero());
        }
        let n = self.0.len();
        let mut q = vec![BigRational::zero(); n - 1];
        let mut acc = BigRational::zero();
        for i in (0..n).rev() {
            acc = &acc * b + &self.0[i];
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (QPoly(q).trim(), acc)
    }

    /// Multiplicity of the root `b`.
    pub fn root_order(&self, b: &BigRational) -> usize {
        let mut k = 0;
        let mut f = self.clone();
        while !f.is_zero() {
            let (q, r) = f.div_linear(b);
            if !r.is_zero() {
                break;
            }
            f = q;
            k += 1;
        }
        k
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.0.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| format!("({c})x^{i}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `num / den` with rational coefficients.
#[derive(Clone, Debug)]
pub struct RationalFunction {
    pub num: QPoly,
    pub den: QPoly,
}

impl RationalFunction {
    pub fn new(num: QPoly, den: QPoly) -> RationalFunction {
        RationalFunction { num, den }
    }

    pub fn inverse(&self) -> RationalFunction {
        RationalFunction { num: self.den.clone(), den: self.num.clone() }
    }

    pub fn mul(&self, o: &RationalFunction) -> RationalFunction {
        RationalFunction { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }
    }

    pub fn add(&self, o: &RationalFunction) -> RationalFunction {
        RationalFunction { num: self.num.mul(&o.den).add(&o.num.mul(&self.den)), den: self.den.mul(&o.den) }
    }

    pub fn scale(&self, s: &BigRational) -> RationalFunction {
        RationalFunction { num: self.num.scale(s), den: self.den.clone() }
    }

    /// Logarithmic derivative `f'/f` as a fraction.
    pub fn dlog(&self) -> RationalFunction {
        // (N'D - ND') / (ND)
        let n = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        RationalFunction { num: n, den: self.num.mul(&self.den) }
    }

    /// Cross-multiplied equality.
    pub fn same_as(&self, o: &RationalFunction) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn synthetic_division() {
        // (x-1)^3 (x+2)
        let f = QPoly::linear(&q(1)).pow(3).mul(&QPoly::linear(&q(-2)));
        assert_eq!(f.root_order(&q(1)), 3);
        assert_eq!(f.root_order(&q(-2)), 1);
        assert_eq!(f.root_order(&q(0)), 0);
    }

    #[test]
    fn dlog_of_power() {
        let x = QPoly::linear(&q(0));
        let f = RationalFunction::new(x.pow(5), QPoly::from_ints(&[1]));
        let d = f.dlog();
        let expect = RationalFunction::new(QPoly::from_ints(&[5]), x.clone());
        assert!(d.same_as(&expect));
    }
}
