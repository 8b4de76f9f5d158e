//! Command-line front end. Every command prints one report on standard output;
//! failures go to standard error with exit code 1 (bad input), 2 (precision
//! exhausted) or 3 (audit or integrality failure).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::connection::{tiny_transport, DivisorConfig, FibreFunctorSpec, MarkedPoint};
use crate::error::{Error, Result};
use crate::freealg::{is_group_like, NcSeries, Word};
use crate::frobenius::{associator, frobenius_transport, integrality_report, marked_path, pmzv, to_form_signs, Associator, IntegralityReport, Margin, PathOptions, RunConfig, Waypoint};
use crate::padic::{dp_ideal_valuation, padic_exp, padic_log, teichmuller, PAdic};

pub const CACHE_ENV: &str = "PADIC_PATHS_CACHE";

#[derive(Parser, Debug)]
#[command(name = "padic-paths", version, about = "Frobenius-invariant p-adic paths, associators and p-adic MZVs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The associator between the first two finite marked points.
    Associator(Common),
    /// A p-adic multiple zeta value read off the associator.
    Mzv {
        /// Comma-separated indices k1,k2,...
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Divided-power integrality margins of every coefficient.
    VerifyIntegrality(Common),
    /// Transport between two fibre functors: `tan(c)` for the tangent vector
    /// at the marked point c, `omega(c)` or a rational for a point.
    Transport {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[command(flatten)]
        common: Common,
    },
    /// Quick invariant checks.
    Selftest(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long)]
    pub prime: Option<u64>,
    /// Truncation weight N.
    #[arg(long)]
    pub weight: Option<usize>,
    /// Absolute p-adic digits wanted.
    #[arg(long, default_value_t = 12)]
    pub prec: i64,
    /// Laurent truncation order T of the gauge.
    #[arg(long)]
    pub t_terms: Option<usize>,
    #[arg(long)]
    pub waypoint: Option<String>,
    /// Branch of the logarithm: log(p) = a, with a in pZ_p.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub log_p: String,
    /// JSON divisor configuration {"p", "N", "points", "signs"?}.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub out: OutputFormat,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// What a command printed and how it ended.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

const DEFAULT_PRIME: u64 = 5;
const DEFAULT_WEIGHT: usize = 5;

/// Parses `argv` (program name first) and runs the command.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { Outcome { code, stdout: text, stderr: String::new() } } else { Outcome { code, stdout: String::new(), stderr: text } };
        }
    };
    match dispatch(&cli.command) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome { code: e.exit_code(), stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn dispatch(cmd: &Command) -> Result<(i32, String)> {
    match cmd {
        Command::Associator(c) => {
            let job = Job::new(c)?;
            match c.out {
                OutputFormat::Json => Ok((0, job.report()?.json + "\n")),
                OutputFormat::Csv => Ok((0, margin_csv(&job.report()?.integrality))),
            }
        }
        Command::Mzv { indices, common } => mzv_command(indices, common),
        Command::VerifyIntegrality(c) => {
            let job = Job::new(c)?;
            let r = job.report()?.integrality;
            let text = match c.out {
                OutputFormat::Json => serde_json::to_string_pretty(&r).expect("serializable") + "\n",
                OutputFormat::Csv => margin_csv(&r),
            };
            Ok((if r.passed { 0 } else { 3 }, text))
        }
        Command::Transport { from, to, common } => transport_command(from, to, common),
        Command::Selftest(c) => selftest(c),
    }
}

/// A resolved run: divisor, engine settings and cache location.
struct Job {
    config: DivisorConfig,
    run: RunConfig,
    custom: bool,
    cache: Option<PathBuf>,
}

struct Report {
    json: String,
    integrality: IntegralityReport,
}

/// Path report for a custom divisor.
#[derive(Serialize, Deserialize)]
struct PathJson {
    p: u64,
    #[serde(rename = "N")]
    n: usize,
    prec: i64,
    a: String,
    waypoint: String,
    points: Vec<String>,
    signs: Vec<i64>,
    from: String,
    to: String,
    coefficients: BTreeMap<String, PAdic>,
    integrality_margins: BTreeMap<usize, Margin>,
}

impl Job {
    fn new(c: &Common) -> Result<Job> {
        let (config, custom) = match &c.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
                let base = DivisorConfig::from_json(&text)?;
                if base.points().len() > 8 {
                    return Err(Error::InvalidInput("at most 8 marked points".into()));
                }
                let p = c.prime.unwrap_or(base.p());
                let n = c.weight.unwrap_or(base.weight());
                (DivisorConfig::with_signs(p, base.points().to_vec(), n, base.signs().to_vec())?, true)
            }
            None => (DivisorConfig::mzv(c.prime.unwrap_or(DEFAULT_PRIME), c.weight.unwrap_or(DEFAULT_WEIGHT))?, false),
        };
        let branch: BigRational = c.log_p.trim().parse().map_err(|_| Error::InvalidInput(format!("bad branch {:?}", c.log_p)))?;
        let waypoint = c.waypoint.as_deref().map(Waypoint::parse).transpose()?;
        let run = RunConfig { p: config.p(), weight: config.weight(), prec: c.prec, order: c.t_terms, waypoint, branch };
        run.validate()?;
        let cache = std::env::var_os(CACHE_ENV).map(PathBuf::from).or_else(|| c.cache_dir.clone());
        Ok(Job { config, run, custom, cache })
    }

    fn cache_file(&self) -> Option<PathBuf> {
        let dir = self.cache.as_ref()?;
        let mut key = format!(
            "{}-p{}-N{}-prec{}-T{}-w{}-a{}",
            if self.custom { "path" } else { "associator" },
            self.run.p,
            self.run.weight,
            self.run.prec,
            self.run.order.map(|t| t.to_string()).unwrap_or_else(|| "auto".into()),
            self.run.waypoint.as_ref().map(|w| w.to_string()).unwrap_or_else(|| "default".into()),
            self.run.branch,
        );
        if self.custom {
            let pts: Vec<String> = self.config.points().iter().map(|x| x.to_string()).collect();
            let signs: Vec<String> = self.config.signs().iter().map(|s| s.to_string()).collect();
            write!(key, "-pts{}-s{}", pts.join(","), signs.join(",")).unwrap();
        }
        let key: String = key.chars().map(|ch| if ch.is_ascii_alphanumeric() || ch == '-' || ch == '.' || ch == ',' { ch } else { '_' }).collect();
        Some(dir.join(format!("{key}.json")))
    }

    fn report(&self) -> Result<Report> {
        let file = self.cache_file();
        if let Some(f) = &file {
            if let Ok(text) = fs::read_to_string(f) {
                if let Ok(r) = self.parse(text.trim_end()) {
                    return Ok(r);
                }
            }
        }
        let json = self.compute()?;
        if let Some(f) = &file {
            write_atomic(f, &json)?;
        }
        self.parse(&json)
    }

    fn compute(&self) -> Result<String> {
        if !self.custom {
            return Ok(associator(&self.run)?.to_json());
        }
        let (from, to) = self.endpoints()?;
        let g = marked_path(&self.config, from, to, &self.run)?;
        let alphabet = self.config.alphabet();
        let integrality = integrality_report(&g, self.run.p, &alphabet);
        let waypoint = self.run.waypoint.clone().unwrap_or_else(|| Waypoint::default_for(&self.config));
        let j = PathJson {
            p: self.run.p,
            n: self.run.weight,
            prec: self.run.prec,
            a: self.run.branch.to_string(),
            waypoint: waypoint.to_string(),
            points: self.config.points().iter().map(|x| x.to_string()).collect(),
            signs: self.config.signs().to_vec(),
            from: self.config.point(from).to_string(),
            to: self.config.point(to).to_string(),
            coefficients: g.terms().map(|(w, c)| (w.render(&alphabet), c.clone())).collect(),
            integrality_margins: integrality.by_weight,
        };
        Ok(serde_json::to_string_pretty(&j).expect("serializable"))
    }

    fn parse(&self, json: &str) -> Result<Report> {
        if !self.custom {
            let a = Associator::from_json(json)?;
            if a.p != self.run.p || a.weight != self.run.weight || a.prec != self.run.prec {
                return Err(Error::Cache("stale cache entry".into()));
            }
            return Ok(Report { json: json.to_string(), integrality: a.integrality() });
        }
        let j: PathJson = serde_json::from_str(json).map_err(|e| Error::Cache(e.to_string()))?;
        let alphabet = self.config.alphabet();
        let mut value = NcSeries::zero(self.config.letters(), j.n);
        for (w, c) in j.coefficients {
            value.set(Word::parse(&w, &alphabet)?, c)?;
        }
        let integrality = integrality_report(&value, j.p, &alphabet);
        Ok(Report { json: json.to_string(), integrality })
    }

    // the first two finite marked points
    fn endpoints(&self) -> Result<(usize, usize)> {
        let finite: Vec<usize> = (0..self.config.points().len()).filter(|&i| matches!(self.config.point(i), MarkedPoint::Finite(_))).collect();
        match finite.as_slice() {
            [a, b, ..] => Ok((*a, *b)),
            _ => Err(Error::InvalidInput("need two finite marked points".into())),
        }
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::Cache(e.to_string()))?;
    let tmp = dir.join(format!(".{}.{}.tmp", path.file_name().unwrap().to_string_lossy(), std::process::id()));
    fs::write(&tmp, text).map_err(|e| Error::Cache(e.to_string()))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Cache(e.to_string())
    })
}

fn margin_str(m: &Margin) -> String {
    match m {
        Margin::Finite(k) => k.to_string(),
        Margin::Infinite => "inf".into(),
        Margin::Indeterminate => "indeterminate".into(),
    }
}

fn opt_str(x: Option<i64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn margin_csv(r: &IntegralityReport) -> String {
    let mut out = String::from("word,weight,valuation,n_abs,threshold,margin\n");
    for l in &r.lines {
        writeln!(out, "{},{},{},{},{},{}", l.word, l.weight, opt_str(l.valuation), opt_str(l.n_abs), l.threshold, margin_str(&l.margin)).unwrap();
    }
    out
}

fn mzv_command(indices: &[u32], c: &Common) -> Result<(i32, String)> {
    if c.config.is_some() {
        return Err(Error::InvalidInput("mzv uses the configuration {inf, 0, 1}".into()));
    }
    if indices.is_empty() || indices.contains(&0) {
        return Err(Error::InvalidInput("indices must be positive".into()));
    }
    let weight: usize = indices.iter().map(|&k| k as usize).sum();
    let n = c.weight.unwrap_or(weight.max(2));
    if weight > n {
        return Err(Error::WeightExceeded(n));
    }
    let common = Common { weight: Some(n), ..c.clone() };
    let job = Job::new(&common)?;
    let phi = Associator::from_json(&job.report()?.json)?;
    let z = pmzv(&phi, indices)?;
    let text = match c.out {
        OutputFormat::Json => serde_json::to_string_pretty(&z).expect("serializable") + "\n",
        OutputFormat::Csv => {
            let ks: Vec<String> = indices.iter().map(|k| k.to_string()).collect();
            format!("indices,valuation,n_abs,threshold,margin\n\"{}\",{},{},{},{}\n", ks.join(","), opt_str(z.valuation), z.value.n_abs(), z.threshold, margin_str(&z.margin))
        }
    };
    Ok((0, text))
}

/// `tan(c)` for the tangent vector at a marked point, otherwise a waypoint.
fn parse_endpoint(s: &str, config: &DivisorConfig, prec: i64) -> Result<FibreFunctorSpec> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix("tan(").and_then(|r| r.strip_suffix(')')) {
        let pt = MarkedPoint::parse(inner)?;
        let i = config.index_of(&pt).ok_or_else(|| Error::InvalidInput(format!("{inner} is not a marked point")))?;
        return Ok(FibreFunctorSpec::tangential(i, config.p(), prec));
    }
    Waypoint::parse(t)?.spec(config, prec)
}

#[derive(Serialize)]
struct TransportJson {
    p: u64,
    #[serde(rename = "N")]
    n: usize,
    prec: i64,
    a: String,
    from: String,
    to: String,
    /// `tiny` inside one residue disc, `frobenius` across discs.
    method: &'static str,
    coefficients: BTreeMap<String, PAdic>,
}

fn transport_command(from: &str, to: &str, c: &Common) -> Result<(i32, String)> {
    if c.out == OutputFormat::Csv {
        return Err(Error::InvalidInput("csv output is limited to margin tables".into()));
    }
    let job = Job::new(c)?;
    let (config, run) = (&job.config, &job.run);
    let p = run.p;
    let work = run.prec + 2 * run.weight as i64 + 8;
    let a = parse_endpoint(from, config, work)?;
    let b = parse_endpoint(to, config, work)?;
    a.validate(config)?;
    b.validate(config)?;
    let (g, method) = if a.disc(config) == b.disc(config) {
        let branch = PAdic::from_rational(p, &run.branch, work)?;
        (tiny_transport(config, &a, &b, &branch, work)?, "tiny")
    } else {
        let opts = PathOptions { prec: run.prec, order: run.order, branch: run.branch.clone(), waypoint: run.waypoint.clone() };
        (frobenius_transport(config, &a, &b, &opts)?, "frobenius")
    };
    let g = to_form_signs(config, &g).map(|x| x.truncate(run.prec));
    let alphabet = config.alphabet();
    let j = TransportJson {
        p,
        n: run.weight,
        prec: run.prec,
        a: run.branch.to_string(),
        from: from.trim().to_string(),
        to: to.trim().to_string(),
        method,
        coefficients: g.terms().map(|(w, c)| (w.render(&alphabet), c.clone())).collect(),
    };
    Ok((0, serde_json::to_string_pretty(&j).expect("serializable") + "\n"))
}

fn selftest(c: &Common) -> Result<(i32, String)> {
    let p = c.prime.unwrap_or(3);
    let n = c.weight.unwrap_or(4);
    let prec = c.prec.min(10);
    let mut out = String::new();
    let mut failed = 0;
    let mut line = |name: &str, ok: bool, detail: String| {
        if !ok {
            failed += 1;
        }
        writeln!(out, "{} {name}: {detail}", if ok { "ok  " } else { "FAIL" }).unwrap();
    };

    let x = PAdic::from_i64(p, p as i64 * 7, prec);
    let rt = padic_exp(&x).and_then(|e| padic_log(&e, &PAdic::zero(p)));
    line("log(exp(x)) = x", rt.as_ref().is_ok_and(|r| r.agreement(&x) >= prec), format!("x = {x}"));
    let w = teichmuller(2, p, prec)?;
    line("teichmuller fixed by p-th power", w.pow(p as u32).agreement(&w) >= prec, format!("omega(2) = {w}"));

    let run = RunConfig { p, weight: n, prec, order: None, waypoint: None, branch: BigRational::zero() };
    let phi = associator(&run)?;
    let gl = is_group_like(&phi.value, p, prec);
    line("shuffle relations", gl.passed, format!("{} pairs", gl.pairs_checked));
    line("single letters vanish", phi.audits.letters_vanish >= prec, format!("{} digits", phi.audits.letters_vanish));
    line("branch independence", phi.audits.branch_agreement >= prec, format!("{} digits", phi.audits.branch_agreement));
    line("gauge residual", phi.audits.gauge_residual >= prec, format!("{} digits", phi.audits.gauge_residual));
    line("symbolic corrections", phi.audits.symbolic, "exact rational identities".into());
    let dual = phi.value.inverse()?.sub(&phi.value.substitute(&[1, 0], &[1, 1]));
    let worst = dual.terms().map(|(_, c)| if c.is_zero() { c.n_abs() } else { c.valuation() }).min().unwrap_or(i64::MAX);
    line("duality Phi(A,B)^-1 = Phi(B,A)", worst >= prec, format!("{} digits", worst.min(prec)));
    if n >= 2 {
        let z2 = pmzv(&phi, &[2])?;
        line("zeta_p(2) = 0", z2.value.is_zero(), format!("{}", z2.value));
    }
    let r = phi.integrality();
    let bounds: Vec<String> = (1..=n).map(|w| format!("{}", dp_ideal_valuation(w as u64, p))).collect();
    line("divided-power integrality", r.passed, format!("bounds {}", bounds.join(",")));
    Ok((if failed == 0 { 0 } else { 3 }, out))
}
