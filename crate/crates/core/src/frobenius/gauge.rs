use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::{correction_terms, FrobeniusLift};
use crate::connection::{tangential_frobenius_scale, DivisorConfig, MarkedPoint};
use crate::error::{Error, Result};
use crate::freealg::{Coeff, NcSeries, Word};
use crate::padic::{floor_log, padic_log, PAdic};
use crate::rigid::{from_rational, integration_loss, rigid_log_unit, RationalFunction, RigidFunction, RigidSpace};

#[derive(Clone, Debug)]
pub struct GaugeOptions {
    /// Digits wanted in every value of the gauge.
    pub prec: i64,
    /// Truncation order of the Laurent tails; chosen from `prec` when absent.
    pub order: Option<usize>,
}

/// The gauge `M` comparing `phi^*` with the connection on one chart:
/// `dM = (phi^* Omega) M - M F(Omega)`, `M = 1` at the chart's point, where
/// `F` is the Frobenius of the fibre at the chart's base. `F(e_j)` is `p e_j`
/// plus higher terms, fixed by asking `M` to be regular at the other poles.
#[derive(Clone, Debug)]
pub struct FrobeniusGauge {
    lift: FrobeniusLift,
    m: NcSeries<RigidFunction>,
    images: Vec<NcSeries<PAdic>>,
    order: usize,
    work: i64,
    residual: i64,
    certified: i64,
}

struct Shape {
    rho0: f64,
    w0: f64,
    degree: usize,
}

// decay of the correction units on the wide open
fn shape(config: &DivisorConfig, lift: &FrobeniusLift) -> Result<Shape> {
    let p = config.p();
    let space = RigidSpace::new(p, config.finite_points(), p as usize + 1, 8)?;
    let mut out = Shape { rho0: 1.0 / (2.0 * p as f64), w0: 1.0, degree: p as usize };
    let mut first = true;
    for b in config.finite_points() {
        if &b == lift.center() {
            continue;
        }
        let f = from_rational(&lift.unit_factor(&b), &space, 0.0)?;
        let g = f.try_add(&RigidFunction::constant(&space, PAdic::from_i64(p, -1, 8), 0.0))?;
        let w0 = g.weighted_valuation(0.0);
        if w0 < 1.0 {
            return Err(Error::LiftConditionViolated(format!("{lift} is not 1 mod p near {b}")));
        }
        let w0 = w0.min(8.0);
        let d = g.degree().max(1);
        let rho = w0 / (2.0 * d as f64);
        if first || rho < out.rho0 {
            out = Shape { rho0: rho, w0, degree: d };
            first = false;
        }
    }
    Ok(out)
}

fn one_letter(i: u8) -> Word {
    Word::letter(i)
}

impl FrobeniusGauge {
    pub fn lift(&self) -> &FrobeniusLift {
        &self.lift
    }

    pub fn entries(&self) -> &NcSeries<RigidFunction> {
        &self.m
    }

    /// `F(e_j)` for each letter.
    pub fn letter_images(&self) -> &[NcSeries<PAdic>] {
        &self.images
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn work_precision(&self) -> i64 {
        self.work
    }

    /// Digits to which `dM` matches the gauge equation.
    pub fn residual_digits(&self) -> i64 {
        self.residual
    }

    /// Digits certified for every value of `M` on the chart.
    pub fn certified_digits(&self) -> i64 {
        self.certified
    }

    pub fn value_at(&self, z: &PAdic) -> Result<NcSeries<PAdic>> {
        self.values(|f| f.eval(z))
    }

    pub fn value_at_infinity(&self) -> Result<NcSeries<PAdic>> {
        self.values(|f| f.eval_infinity())
    }

    fn values(&self, ev: impl Fn(&RigidFunction) -> Result<PAdic>) -> Result<NcSeries<PAdic>> {
        let p = self.lift.p;
        let mut out = NcSeries::identity(self.m.letters(), self.m.weight(), PAdic::one(p, self.certified));
        for (w, f) in self.m.terms() {
            if w.is_empty() {
                continue;
            }
            out.set(w.clone(), ev(f)?.truncate(self.certified))?;
        }
        Ok(out)
    }
}

/// Solves the gauge weight by weight. The precision is raised and the solve
/// repeated when the certificate falls short.
pub fn solve_gauge(config: &DivisorConfig, lift: &FrobeniusLift, opts: &GaugeOptions) -> Result<FrobeniusGauge> {
    let p = config.p();
    lift.check()?;
    let (lambda, _) = tangential_frobenius_scale(config, lift.point(), &PAdic::one(p, 16), lift)?;
    if !padic_log(&lambda, &PAdic::zero(p))?.is_zero() {
        return Err(Error::LiftConditionViolated("anchor tangent vector is not fixed by the lift".into()));
    }
    let sh = shape(config, lift)?;
    let mut extra = 0;
    let mut last = (0, 0);
    for _ in 0..4 {
        let g = build(config, lift, opts.prec + extra, opts.order, &sh)?;
        let got = g.certified.min(g.residual);
        if got >= opts.prec {
            return Ok(g);
        }
        extra += opts.prec - got + 4;
        last = (g.certified, g.residual);
    }
    if last.0 >= opts.prec {
        return Err(Error::AuditFailed(format!("gauge residual only {} digits", last.1)));
    }
    Err(Error::PrecisionExhausted(format!("gauge certified to {} of {} digits", last.0, opts.prec)))
}

fn build(config: &DivisorConfig, lift: &FrobeniusLift, prec: i64, order: Option<usize>, sh: &Shape) -> Result<FrobeniusGauge> {
    let p = config.p();
    let n = config.weight();
    let s = config.letters();
    let rho0 = sh.rho0;
    let delta = rho0 / (2.0 * n as f64 + 2.0);
    let per_weight = -integration_loss(p, delta) + 2.0 * rho0 + 1.0;
    let log_target = prec as f64 + n as f64 * per_weight + 4.0;
    let order = order.unwrap_or_else(|| {
        let scale = 2.0 * sh.degree as f64 / sh.w0;
        let mut t = scale * (log_target + 2.0);
        for _ in 0..3 {
            t = scale * (log_target + floor_log(p, t as u64) as f64 + 2.0);
        }
        (t.ceil() as usize).max(p as usize * n).max(p as usize + 1)
    });
    let work = log_target.ceil() as i64 + n as i64 * (floor_log(p, order as u64) + 2) + 6;
    let space = RigidSpace::new(p, config.finite_points(), order, work)?;
    let center = space.pole_index(lift.center()).expect("chart point is a pole");
    let a = PAdic::from_rational(p, lift.center(), work)?;
    let pv = PAdic::from_i64(p, p as i64, work);

    // kappa_j and the normalized corrections k_j with dk_j = phi^* kappa_j - p kappa_j
    let mut logs: BTreeMap<BigRational, RigidFunction> = BTreeMap::new();
    let mut kappa = Vec::with_capacity(s);
    let mut k = Vec::with_capacity(s);
    let mut residual = f64::INFINITY;
    for j in 0..s {
        let mut kj = RigidFunction::zero(&space, rho0);
        for (c, b) in config.form_terms(j) {
            let MarkedPoint::Finite(q) = config.point(b) else { unreachable!() };
            let idx = space.pole_index(q).unwrap();
            let term = RigidFunction::pole_term(&space, idx, 1, PAdic::from_i64(p, c, work), rho0)?;
            kj = kj.try_add(&term)?;
        }
        kappa.push(kj);
        let mut h = RigidFunction::zero(&space, rho0);
        for (c, b) in correction_terms(config, lift, j) {
            if !logs.contains_key(&b) {
                let f = lift.unit_factor(&b);
                let l = rigid_log_unit(&f, &space, rho0, log_target)?;
                // F_b dlog F_b = dF_b, exactly
                let fr = from_rational(&f, &space, rho0)?;
                let dfr = from_rational(&RationalFunction::new(f.num.derivative().mul(&f.den).sub(&f.num.mul(&f.den.derivative())), f.den.mul(&f.den)), &space, rho0)?;
                let r = l.derivative().try_mul(&fr)?.try_add(&dfr.neg())?;
                residual = residual.min(r.weighted_valuation(r.rho()).min(r.tail()));
                logs.insert(b.clone(), l);
            }
            h = h.try_add(&logs[&b].scale_by(&PAdic::from_i64(p, c, work)))?;
        }
        let h0 = h.eval(&a)?;
        h = h.try_add(&RigidFunction::constant(&space, -&h0, rho0))?;
        k.push(h);
    }
    let pulled: Vec<RigidFunction> = (0..s).map(|j| k[j].derivative().try_add(&kappa[j].scale_by(&pv))).collect::<Result<_>>()?;

    // residues of Omega at the finite poles, as combinations of letters
    let npoles = config.finite_points().len();
    let mut res = vec![vec![0i64; s]; npoles];
    for (j, _) in kappa.iter().enumerate() {
        for (c, b) in config.form_terms(j) {
            let MarkedPoint::Finite(q) = config.point(b) else { unreachable!() };
            res[space.pole_index(q).unwrap()][j] += c;
        }
    }
    // y[b] is the fibre Frobenius of the residue at b, divided by p
    let mut y: Vec<BTreeMap<Word, PAdic>> = vec![BTreeMap::new(); npoles];
    for (b, row) in res.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c != 0 {
                y[b].insert(one_letter(j as u8), PAdic::from_i64(p, c, work));
            }
        }
    }
    let dlog: Vec<RigidFunction> = (0..npoles).map(|b| RigidFunction::pole_term(&space, b, 1, pv.clone(), rho0)).collect::<Result<_>>()?;

    let one = RigidFunction::constant(&space, PAdic::one(p, work), rho0);
    let mut m = NcSeries::identity(s, n, one);
    for (j, kj) in k.iter().enumerate() {
        m.set(one_letter(j as u8), kj.clone())?;
    }
    for w in 2..=n {
        for word in Word::all_of_weight(s, w) {
            let i = word.0[0] as usize;
            let right = Word(word.0[1..].to_vec());
            let mut f = RigidFunction::zero(&space, rho0);
            if let Some(mu) = m.coeff(&right) {
                f = f.try_add(&pulled[i].try_mul(mu)?)?;
            }
            for (b, yb) in y.iter_mut().enumerate() {
                let mut acc: Option<RigidFunction> = None;
                for cut in 1..w {
                    let (Some(c), Some(mu)) = (yb.get(&Word(word.0[cut..].to_vec())), m.coeff(&Word(word.0[..cut].to_vec()))) else { continue };
                    let t = mu.scale_by(c);
                    acc = Some(match acc {
                        Some(x) => x.try_add(&t)?,
                        None => t,
                    });
                }
                if let Some(acc) = acc {
                    f = f.try_add(&acc.try_mul(&dlog[b])?.neg())?;
                }
            }
            // M is regular across the other poles
            for (b, yb) in y.iter_mut().enumerate() {
                let r = f.residue(b);
                if b != center && !r.is_exact_zero() {
                    f = f.try_add(&RigidFunction::pole_term(&space, b, 1, -&r, rho0)?)?;
                    yb.insert(word.clone(), r.div_int(p as i64));
                }
            }
            // the chart point is a regular point of M: no principal part there
            let f_reg = f.drop_part(center);
            let mw = f_reg.primitive(Some(&a), delta)?;
            let r = mw.derivative().try_add(&f.neg())?;
            residual = residual.min(r.weighted_valuation(r.rho()).min(r.tail()));
            m.set(word, mw)?;
        }
    }
    let mut certified = i64::MAX;
    for (w, f) in m.terms() {
        if w.is_empty() {
            continue;
        }
        certified = certified.min(f.certified_digits());
        for c in f.poly().iter().chain((0..config.finite_points().len()).flat_map(|b| f.part(b).iter())) {
            certified = certified.min(c.n_abs());
        }
    }
    let certified = certified.min(work);
    let residual = if residual.is_finite() { residual.floor() as i64 } else { work };
    let images = letter_images(&res, &y, p, n, certified)?;
    Ok(FrobeniusGauge { lift: lift.clone(), m, images, order, work, residual: residual.min(work), certified })
}

// F(R_b) = p y_b for the residue R_b = sum_j res[b][j] e_j; solved for F(e_j)
fn letter_images(res: &[Vec<i64>], y: &[BTreeMap<Word, PAdic>], p: u64, n: usize, prec: i64) -> Result<Vec<NcSeries<PAdic>>> {
    let s = res.first().map(|r| r.len()).unwrap_or(0);
    let q = |x: i64| BigRational::from_integer(x.into());
    // rows spanning the letters, in echelon form alongside the identity
    let mut rows: Vec<(Vec<BigRational>, Vec<BigRational>)> = Vec::new();
    for (b, r) in res.iter().enumerate() {
        let mut v: Vec<BigRational> = r.iter().map(|&c| q(c)).collect();
        let mut t: Vec<BigRational> = (0..res.len()).map(|i| q((i == b) as i64)).collect();
        for (pv, pt) in &rows {
            let lead = pv.iter().position(|c| !c.is_zero()).unwrap();
            if !v[lead].is_zero() {
                let f = &v[lead] / &pv[lead];
                for i in 0..s {
                    v[i] = &v[i] - &f * &pv[i];
                }
                for i in 0..t.len() {
                    t[i] = &t[i] - &f * &pt[i];
                }
            }
        }
        if v.iter().any(|c| !c.is_zero()) {
            rows.push((v, t));
        }
    }
    if rows.len() != s {
        return Err(Error::AuditFailed("residues do not span the letters".into()));
    }
    // back substitution: express each e_j through the residues
    rows.sort_by_key(|(v, _)| v.iter().position(|c| !c.is_zero()).unwrap());
    for k in (0..s).rev() {
        let c = rows[k].0[k].clone();
        for i in 0..s {
            rows[k].0[i] = &rows[k].0[i] / &c;
        }
        for i in 0..rows[k].1.len() {
            rows[k].1[i] = &rows[k].1[i] / &c;
        }
        for r in 0..k {
            let f = rows[r].0[k].clone();
            if f.is_zero() {
                continue;
            }
            let (pv, pt) = rows[k].clone();
            for i in 0..s {
                rows[r].0[i] = &rows[r].0[i] - &f * &pv[i];
            }
            for i in 0..pt.len() {
                rows[r].1[i] = &rows[r].1[i] - &f * &pt[i];
            }
        }
    }
    let mut out = Vec::with_capacity(s);
    for (_, t) in &rows {
        let mut img = NcSeries::zero(s, n);
        for (b, c) in t.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = PAdic::from_rational(p, c, prec)?.scale_int(p as i64);
            img = img.add(&series_of(&y[b], s, n).scale(&c));
        }
        out.push(img.map(|x: &PAdic| x.truncate(prec)));
    }
    Ok(out)
}

fn series_of(y: &BTreeMap<Word, PAdic>, s: usize, n: usize) -> NcSeries<PAdic> {
    let mut out = NcSeries::zero(s, n);
    for (w, c) in y {
        out.set(w.clone(), c.clone()).expect("weight within range");
    }
    out
}
