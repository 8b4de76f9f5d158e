//! Truncated noncommutative power series in letters `e_1..e_s`.
//!
//! A series is a sparse map from words to coefficients in some ring `C`;
//! missing words are zero. Products drop every word longer than the
//! truncation weight.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::padic::PAdic;

/// Coefficient ring interface. Every `C` used here is commutative.
pub trait Coeff: Clone + fmt::Debug {
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, s: &PAdic) -> Self;
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn try_inv(&self) -> Option<Self>;

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
}

impl Coeff for PAdic {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, s: &PAdic) -> Self {
        self * s
    }
    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
    fn zero_like(&self) -> Self {
        PAdic::zero(self.p())
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
}

/// A word in the letters `0..s`, read left to right.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letter(i: u8) -> Word {
        Word(vec![i])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Parses `"AAB"` style words over an alphabet of single characters;
    /// `"1"` is the empty word.
    pub fn parse(s: &str, alphabet: &[char]) -> Result<Word> {
        if s == "1" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| {
                alphabet
                    .iter()
                    .position(|&a| a == c)
                    .map(|i| i as u8)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown letter {c:?}")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }

    pub fn render(&self, alphabet: &[char]) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0.iter().map(|&i| alphabet.get(i as usize).copied().unwrap_or('?')).collect()
    }

    /// All words of length `w` over `s` letters, in lexicographic order.
    pub fn all_of_weight(s: usize, w: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..w {
            let mut next = Vec::with_capacity(out.len() * s);
            for word in &out {
                for i in 0..s {
                    let mut v = word.0.clone();
                    v.push(i as u8);
                    next.push(Word(v));
                }
            }
            out = next;
        }
        out
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Word) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Word) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub const DEFAULT_ALPHABET: [char; 8] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'];

/// Shuffle product with multiplicities.
pub fn shuffle(u: &Word, v: &Word) -> BTreeMap<Word, u64> {
    let mut out = BTreeMap::new();
    shuffle_into(&u.0, &v.0, &mut Vec::new(), &mut out);
    out
}

fn shuffle_into(u: &[u8], v: &[u8], prefix: &mut Vec<u8>, out: &mut BTreeMap<Word, u64>) {
    if u.is_empty() || v.is_empty() {
        let mut w = prefix.clone();
        w.extend_from_slice(u);
        w.extend_from_slice(v);
        *out.entry(Word(w)).or_insert(0) += 1;
        return;
    }
    prefix.push(u[0]);
    shuffle_into(&u[1..], v, prefix, out);
    prefix.pop();
    prefix.push(v[0]);
    shuffle_into(u, &v[1..], prefix, out);
    prefix.pop();
}

#[derive(Clone, Debug)]
pub struct NcSeries<C: Coeff> {
    letters: usize,
    weight: usize,
    terms: BTreeMap<Word, C>,
}

impl<C: Coeff> NcSeries<C> {
    pub fn zero(letters: usize, weight: usize) -> Self {
        NcSeries { letters, weight, terms: BTreeMap::new() }
    }

    /// The series `1`, with `one` the unit of the coefficient ring.
    pub fn identity(letters: usize, weight: usize, one: C) -> Self {
        let mut s = Self::zero(letters, weight);
        s.terms.insert(Word::empty(), one);
        s
    }

    pub fn letters(&self) -> usize {
        self.letters
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn coeff(&self, w: &Word) -> Option<&C> {
        self.terms.get(w)
    }

    pub fn set(&mut self, w: Word, c: C) -> Result<()> {
        if w.len() > self.weight {
            return Err(Error::WeightExceeded(self.weight));
        }
        if w.0.iter().any(|&i| i as usize >= self.letters) {
            return Err(Error::InvalidInput("letter out of range".into()));
        }
        if c.is_zero() {
            self.terms.remove(&w);
        } else {
            self.terms.insert(w, c);
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &o.terms {
            let v = match out.terms.get(w) {
                Some(x) => x.add(c),
                None => c.clone(),
            };
            out.put(w.clone(), v);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &PAdic) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero(self.letters, self.weight);
        for (w, c) in &self.terms {
            out.put(w.clone(), f(c));
        }
        out
    }

    pub fn try_map<D: Coeff>(&self, f: impl Fn(&C) -> Result<D>) -> Result<NcSeries<D>> {
        let mut out = NcSeries::zero(self.letters, self.weight);
        for (w, c) in &self.terms {
            out.put(w.clone(), f(c)?);
        }
        Ok(out)
    }

    fn put(&mut self, w: Word, c: C) {
        if c.is_zero() {
            self.terms.remove(&w);
        } else {
            self.terms.insert(w, c);
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let weight = self.weight.min(o.weight);
        let mut out = Self::zero(self.letters, weight);
        for (u, a) in &self.terms {
            for (v, b) in &o.terms {
                if u.len() + v.len() > weight {
                    continue;
                }
                let w = u.concat(v);
                let c = a.mul(b);
                let c = match out.terms.get(&w) {
                    Some(x) => x.add(&c),
                    None => c,
                };
                out.put(w, c);
            }
        }
        out
    }

    /// Part of weight exactly `w`.
    pub fn weight_part(&self, w: usize) -> Self {
        let mut out = Self::zero(self.letters, self.weight);
        for (k, c) in self.terms.iter().filter(|(k, _)| k.len() == w) {
            out.terms.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn truncate(&self, weight: usize) -> Self {
        let mut out = Self::zero(self.letters, weight.min(self.weight));
        for (k, c) in self.terms.iter().filter(|(k, _)| k.len() <= weight) {
            out.terms.insert(k.clone(), c.clone());
        }
        out
    }

    /// Inverse of a series whose constant term is invertible.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.terms.get(&Word::empty()).ok_or(Error::NonInvertible)?;
        let c0i = c0.try_inv().ok_or(Error::NonInvertible)?;
        let one = c0.mul(&c0i);
        let unit = Self::identity(self.letters, self.weight, one);
        let mut y = self.map(|c| c.mul(&c0i));
        y.terms.remove(&Word::empty());
        // (1 + y)^{-1} = sum (-y)^k; y has no constant term so k <= weight
        let neg_y = y.neg();
        let mut acc = unit.clone();
        let mut pw = unit;
        for _ in 0..self.weight {
            pw = pw.mul(&neg_y);
            if pw.terms.is_empty() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.map(|c| c.mul(&c0i)))
    }

    /// Multiplies each word by the product of the per-letter factors.
    pub fn letter_scale(&self, factors: &[PAdic]) -> Self {
        let mut out = Self::zero(self.letters, self.weight);
        for (w, c) in &self.terms {
            let mut c = c.clone();
            for &i in &w.0 {
                c = c.scale(&factors[i as usize]);
            }
            out.put(w.clone(), c);
        }
        out
    }

    /// Applies the letter substitution `e_i -> sign_i * e_{target_i}`.
    pub fn substitute(&self, target: &[u8], sign: &[i64]) -> Self {
        let mut out = Self::zero(self.letters, self.weight);
        for (w, c) in &self.terms {
            let neg = w.0.iter().filter(|&&i| sign[i as usize] < 0).count() % 2 == 1;
            let nw = Word(w.0.iter().map(|&i| target[i as usize]).collect());
            let c = if neg { c.neg() } else { c.clone() };
            let c = match out.terms.get(&nw) {
                Some(x) => x.add(&c),
                None => c,
            };
            out.put(nw, c);
        }
        out
    }
}

impl NcSeries<PAdic> {
    /// `exp(x)` for a series without constant term.
    pub fn exp(x: &NcSeries<PAdic>, p: u64, n_abs: i64) -> Result<NcSeries<PAdic>> {
        if x.terms.get(&Word::empty()).map(|c| !c.is_zero()).unwrap_or(false) {
            return Err(Error::InvalidInput("exp needs a series without constant term".into()));
        }
        let mut acc = NcSeries::identity(x.letters, x.weight, PAdic::one(p, n_abs));
        let mut term = acc.clone();
        for k in 1..=x.weight {
            term = term.mul(x).map(|c| c.div_int(k as i64));
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Smallest absolute precision over all stored coefficients.
    pub fn min_precision(&self) -> i64 {
        self.terms.values().map(|c| c.n_abs()).min().unwrap_or(crate::padic::INF)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLikeReport {
    pub pairs_checked: usize,
    /// Smallest valuation among all shuffle defects (and the constant-term defect).
    pub worst_valuation: i64,
    pub passed: bool,
}

/// Checks `<g,u><g,v> = <g, u sh v>` for all nonempty `u, v` with
/// `|u| + |v| <= N`, and `<g,1> = 1`, each to `digits` digits.
pub fn is_group_like(g: &NcSeries<PAdic>, p: u64, digits: i64) -> GroupLikeReport {
    let zero = PAdic::zero(p);
    let get = |w: &Word| g.coeff(w).cloned().unwrap_or_else(|| zero.clone());
    let mut worst = get(&Word::empty()).checked_sub(&PAdic::one(p, digits)).map(|d| d.valuation()).unwrap_or(i64::MIN);
    let mut pairs = 0;
    for a in 1..g.weight() {
        for b in 1..=(g.weight() - a) {
            if a > b {
                continue;
            }
            for u in Word::all_of_weight(g.letters(), a) {
                for v in Word::all_of_weight(g.letters(), b) {
                    if a == b && u > v {
                        continue;
                    }
                    let lhs = &get(&u) * &get(&v);
                    let mut rhs = PAdic::zero(p);
                    for (w, m) in shuffle(&u, &v) {
                        rhs = &rhs + &get(&w).scale_int(m as i64);
                    }
                    worst = worst.min((&lhs - &rhs).valuation());
                    pairs += 1;
                }
            }
        }
    }
    GroupLikeReport { pairs_checked: pairs, worst_valuation: worst, passed: worst >= digits }
}
