//! Command-line flags, the flat config file, and the validated run
//! configuration built from both.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use padic_qgamma::volkenborn::check_budget;
use padic_qgamma::{q_make, PadicContext, QParam};

/// Summands allowed per integral when `--max-sum-exponent` is not given.
pub const DEFAULT_SUMMANDS: u64 = 1_000_000;

#[derive(Parser, Debug, Default)]
#[command(
    name = "qgamma",
    version,
    about = "Evaluate and audit p-adic q-Euler numbers, q-Bernoulli numbers and the p-adic q-log-gamma function"
)]
pub struct Cli {
    /// What to do.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Prime or comma-separated primes.
    #[arg(long, value_name = "P[,P..]")]
    pub p: Option<String>,
    /// Working precision N in digits.
    #[arg(long)]
    pub precision: Option<String>,
    /// q = 1 + t p^m, repeatable.
    #[arg(long, value_name = "T,M")]
    pub q: Vec<String>,
    /// Rational argument, repeatable; numerator and denominator may use `p`,
    /// as in `1/p` or `(p+1)/p`.
    #[arg(long, value_name = "A/B", allow_hyphen_values = true)]
    pub x: Vec<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// Audit target in digits.
    #[arg(long)]
    pub target: Option<String>,
    /// Largest Riemann-sum depth; p^depth summands per integral.
    #[arg(long)]
    pub max_sum_exponent: Option<String>,
    /// Treat unstabilized Riemann sums as a distinct failure (exit 3).
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_name = "json|csv|text")]
    pub format: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Series truncation degree.
    #[arg(long = "K")]
    pub k: Option<String>,
    /// eq3, eq6, eq8, eq9, eq10, eq12, thmA, limits or all.
    #[arg(long)]
    pub suite: Option<String>,
    /// q-euler, q-bernoulli, classical-euler, classical-bernoulli, gamma,
    /// t-gamma or bracket.
    #[arg(long)]
    pub quantity: Option<String>,
    /// stability, discrepancy or t-conjecture.
    #[arg(long)]
    pub kind: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub workers: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Eval,
    Verify,
    Report,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Eq3,
    Eq6,
    Eq8,
    Eq9,
    Eq10,
    Eq12,
    ThmA,
    Limits,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Eq3,
        Suite::Eq6,
        Suite::Eq8,
        Suite::Eq9,
        Suite::Eq10,
        Suite::Eq12,
        Suite::ThmA,
        Suite::Limits,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    QEuler,
    QBernoulli,
    ClassicalEuler,
    ClassicalBernoulli,
    Gamma,
    TGamma,
    Bracket,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportKind {
    Stability,
    Discrepancy,
    TConjecture,
}

/// A configuration problem; always exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// `c * p + d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Affine {
    c: i64,
    d: i64,
}

impl Affine {
    fn parse(s: &str) -> Option<Self> {
        let s: String = s
            .chars()
            .filter(|ch| !ch.is_whitespace() && *ch != '(' && *ch != ')')
            .collect();
        if let Ok(d) = s.parse() {
            return Some(Affine { c: 0, d });
        }
        let (head, tail) = {
            let i = s.find('p')?;
            (&s[..i], &s[i + 1..])
        };
        let c = match head.trim_end_matches('*') {
            "" | "+" => 1,
            "-" => -1,
            h => h.parse().ok()?,
        };
        let d = match tail {
            "" => 0,
            t if t.starts_with('+') => t[1..].parse().ok()?,
            t if t.starts_with('-') => t.parse().ok()?,
            _ => return None,
        };
        Some(Affine { c, d })
    }

    fn at(self, p: u32) -> Option<i64> {
        self.c.checked_mul(p as i64)?.checked_add(self.d)
    }
}

/// An argument `a/b` whose parts may depend on the prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XSpec {
    text: String,
    num: Affine,
    den: Affine,
}

impl XSpec {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let err = || bad(format!("cannot parse x = {s:?}; expected a/b"));
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (Affine::parse(a).ok_or_else(err)?, Affine::parse(b).ok_or_else(err)?),
            None => (Affine::parse(s).ok_or_else(err)?, Affine { c: 0, d: 1 }),
        };
        Ok(XSpec {
            text: s.trim().to_string(),
            num,
            den,
        })
    }

    pub fn at(&self, p: u32) -> Result<BigRational, ConfigError> {
        let overflow = || bad(format!("x = {} overflows at p = {p}", self.text));
        let a = self.num.at(p).ok_or_else(overflow)?;
        let b = self.den.at(p).ok_or_else(overflow)?;
        if b == 0 {
            return Err(bad(format!("x = {} has a zero denominator at p = {p}", self.text)));
        }
        Ok(BigRational::new(BigInt::from(a), BigInt::from(b)))
    }
}

/// Everything a command needs, validated.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub primes: Vec<u32>,
    pub precision: u32,
    /// `(t, m)` pairs, sorted.
    pub qs: Vec<(i64, i64)>,
    /// Empty means the per-command default.
    pub xs: Vec<XSpec>,
    pub n: Option<usize>,
    pub target: i64,
    pub max_sum_exponent: Option<u32>,
    pub strict: bool,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub suite: Option<Vec<Suite>>,
    pub quantity: Option<Quantity>,
    pub kind: Option<ReportKind>,
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn context(&self, p: u32) -> PadicContext {
        PadicContext::new(p as i64, self.precision as i64).expect("validated")
    }

    pub fn q(&self, p: u32, (t, m): (i64, i64)) -> QParam {
        q_make(t, m, self.context(p)).expect("validated")
    }

    /// Riemann-sum depth cap for `p`.
    pub fn max_depth(&self, p: u32) -> u32 {
        self.max_sum_exponent
            .unwrap_or_else(|| default_depth(p))
    }

    /// The `x` grid at `p`, sorted and without duplicates.
    pub fn xs_at(&self, p: u32, default: &[&str]) -> Result<Vec<BigRational>, ConfigError> {
        let mut out = if self.xs.is_empty() {
            default
                .iter()
                .map(|s| XSpec::parse(s).and_then(|x| x.at(p)))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            self.xs.iter().map(|x| x.at(p)).collect::<Result<Vec<_>, _>>()?
        };
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// Largest depth with `p^depth <= DEFAULT_SUMMANDS`.
pub fn default_depth(p: u32) -> u32 {
    let mut depth = 0;
    let mut points = 1u64;
    while points * p as u64 <= DEFAULT_SUMMANDS {
        points *= p as u64;
        depth += 1;
    }
    depth
}

/// Raw settings keyed by flag name; each key holds one or more values.
pub type Settings = BTreeMap<String, Vec<String>>;

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

/// Parses the flat config format: `key = value` per line, `#` comments,
/// repeated keys accumulate and `;` separates several values on one line.
pub fn parse_config_file(text: &str) -> Result<Settings, ConfigError> {
    let mut out = Settings::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("config line {}: expected key = value", i + 1)))?;
        let key = normalize_key(key);
        if key == "config" {
            return Err(bad("config files cannot include other config files"));
        }
        let entry = out.entry(key).or_default();
        entry.extend(
            value
                .split(';')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from),
        );
    }
    Ok(out)
}

impl Cli {
    /// Flag values as settings; only flags actually given appear.
    pub fn settings(&self) -> Settings {
        let mut out = Settings::new();
        let mut one = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                out.insert(k.to_string(), vec![v.clone()]);
            }
        };
        one("p", &self.p);
        one("precision", &self.precision);
        one("n", &self.n);
        one("target", &self.target);
        one("max-sum-exponent", &self.max_sum_exponent);
        one("format", &self.format);
        one("k", &self.k);
        one("suite", &self.suite);
        one("quantity", &self.quantity);
        one("kind", &self.kind);
        one("workers", &self.workers);
        if let Some(c) = self.command {
            let name = c.to_possible_value().expect("no skipped variants");
            out.insert("command".into(), vec![name.get_name().to_string()]);
        }
        if let Some(o) = &self.out {
            out.insert("out".into(), vec![o.display().to_string()]);
        }
        if self.strict {
            out.insert("strict".into(), vec!["true".into()]);
        }
        if !self.q.is_empty() {
            out.insert("q".into(), self.q.clone());
        }
        if !self.x.is_empty() {
            out.insert("x".into(), self.x.clone());
        }
        out
    }
}

const KEYS: [&str; 16] = [
    "command",
    "p",
    "precision",
    "q",
    "x",
    "n",
    "target",
    "max-sum-exponent",
    "strict",
    "format",
    "out",
    "k",
    "suite",
    "quantity",
    "kind",
    "workers",
];

fn single<'a>(s: &'a Settings, key: &str) -> Result<Option<&'a str>, ConfigError> {
    match s.get(key).map(Vec::as_slice) {
        None | Some([]) => Ok(None),
        Some([v]) => Ok(Some(v.as_str())),
        Some(_) => Err(bad(format!("{key} given more than once"))),
    }
}

fn number<T: std::str::FromStr>(s: &Settings, key: &str) -> Result<Option<T>, ConfigError> {
    single(s, key)?
        .map(|v| {
            v.parse()
                .map_err(|_| bad(format!("{key} = {v:?} is not a valid number")))
        })
        .transpose()
}

fn parse_q(s: &str) -> Result<(i64, i64), ConfigError> {
    let err = || bad(format!("cannot parse q = {s:?}; expected t,m"));
    let (t, m) = s.split_once(',').ok_or_else(err)?;
    Ok((
        t.trim().parse().map_err(|_| err())?,
        m.trim().parse().map_err(|_| err())?,
    ))
}

fn parse_suite(s: &str) -> Result<Vec<Suite>, ConfigError> {
    Ok(match s {
        "eq3" => vec![Suite::Eq3],
        "eq6" => vec![Suite::Eq6],
        "eq8" => vec![Suite::Eq8],
        "eq9" => vec![Suite::Eq9],
        "eq10" => vec![Suite::Eq10],
        "eq12" => vec![Suite::Eq12],
        "thmA" | "thma" => vec![Suite::ThmA],
        "limits" => vec![Suite::Limits],
        "all" => Suite::ALL.to_vec(),
        other => return Err(bad(format!("unknown suite {other:?}"))),
    })
}

fn parse_quantity(s: &str) -> Result<Quantity, ConfigError> {
    Ok(match s {
        "q-euler" => Quantity::QEuler,
        "q-bernoulli" => Quantity::QBernoulli,
        "classical-euler" => Quantity::ClassicalEuler,
        "classical-bernoulli" => Quantity::ClassicalBernoulli,
        "gamma" => Quantity::Gamma,
        "t-gamma" => Quantity::TGamma,
        "bracket" => Quantity::Bracket,
        other => return Err(bad(format!("unknown quantity {other:?}"))),
    })
}

fn parse_kind(s: &str) -> Result<ReportKind, ConfigError> {
    Ok(match s {
        "stability" => ReportKind::Stability,
        "discrepancy" => ReportKind::Discrepancy,
        "t-conjecture" => ReportKind::TConjecture,
        other => return Err(bad(format!("unknown report kind {other:?}"))),
    })
}

/// Builds and validates a [`RunConfig`] from merged settings.
pub fn resolve(s: &Settings) -> Result<RunConfig, ConfigError> {
    if let Some(key) = s.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(bad(format!("unknown setting {key:?}")));
    }
    let command = match single(s, "command")? {
        Some(c) => Command::from_str(c, true).map_err(|_| bad(format!("unknown command {c:?}")))?,
        None => return Err(bad("no command given (eval, verify or report)")),
    };

    let mut primes = match single(s, "p")? {
        Some(list) => list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<u32>()
                    .map_err(|_| bad(format!("cannot parse prime {v:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?,
        None => vec![3],
    };
    primes.sort_unstable();
    primes.dedup();

    let precision: u32 = number(s, "precision")?.unwrap_or(30);
    let target: i64 = number(s, "target")?.unwrap_or(12);
    if target < 1 || target > precision as i64 {
        return Err(bad(format!(
            "target {target} must lie between 1 and the precision {precision}"
        )));
    }

    let mut qs = match s.get("q") {
        Some(list) if !list.is_empty() => list.iter().map(|v| parse_q(v)).collect::<Result<Vec<_>, _>>()?,
        _ => vec![(1, 2)],
    };
    qs.sort_unstable();
    qs.dedup();

    let xs = s
        .get("x")
        .map(|list| list.iter().map(|v| XSpec::parse(v)).collect::<Result<Vec<_>, _>>())
        .transpose()?
        .unwrap_or_default();

    let max_sum_exponent: Option<u32> = number(s, "max-sum-exponent")?;
    for &p in &primes {
        let ctx = PadicContext::new(p as i64, precision as i64)
            .map_err(|e| bad(format!("p = {p}, precision {precision}: {e}")))?;
        for &(t, m) in &qs {
            q_make(t, m, ctx).map_err(|e| bad(format!("q = {t},{m} at p = {p}: {e}")))?;
        }
        for x in &xs {
            x.at(p)?;
        }
        let depth = max_sum_exponent.unwrap_or_else(|| default_depth(p));
        if depth == 0 {
            return Err(bad("max-sum-exponent must be at least 1"));
        }
        check_budget(p, depth).map_err(|e| bad(format!("p = {p}: {e}")))?;
    }

    let strict = match single(s, "strict")? {
        None | Some("false") => false,
        Some("true") => true,
        Some(v) => return Err(bad(format!("strict = {v:?} is not a boolean"))),
    };
    let format = single(s, "format")?
        .map(|f| match f {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            other => Err(bad(format!("unknown format {other:?}"))),
        })
        .transpose()?;
    let workers: Option<usize> = number(s, "workers")?;
    if workers == Some(0) {
        return Err(bad("workers must be at least 1"));
    }

    Ok(RunConfig {
        command,
        primes,
        precision,
        qs,
        xs,
        n: number(s, "n")?,
        target,
        max_sum_exponent,
        strict,
        format,
        out: single(s, "out")?.map(PathBuf::from),
        k: number(s, "k")?,
        suite: single(s, "suite")?.map(parse_suite).transpose()?,
        quantity: single(s, "quantity")?.map(parse_quantity).transpose()?,
        kind: single(s, "kind")?.map(parse_kind).transpose()?,
        workers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_specs_in_terms_of_p() {
        let r = |a, b| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(XSpec::parse("1/p").unwrap().at(5).unwrap(), r(1, 5));
        assert_eq!(XSpec::parse("(p+1)/p").unwrap().at(7).unwrap(), r(8, 7));
        assert_eq!(XSpec::parse("2p-1/3").unwrap().at(3).unwrap(), r(5, 3));
        assert_eq!(XSpec::parse("-4/6").unwrap().at(3).unwrap(), r(-2, 3));
        assert_eq!(XSpec::parse("2").unwrap().at(3).unwrap(), r(2, 1));
        assert!(XSpec::parse("1/0").unwrap().at(3).is_err());
        assert!(XSpec::parse("1/q").is_err());
    }

    #[test]
    fn config_file_and_override() {
        let file = "# grid\ncommand = verify\np = 3,5\nq = 1,2; 2,3\nq = 1,3\nmax_sum_exponent = 6\n";
        let mut s = parse_config_file(file).unwrap();
        assert_eq!(s["q"], vec!["1,2", "2,3", "1,3"]);
        s.insert("p".into(), vec!["7".into()]);
        let cfg = resolve(&s).unwrap();
        assert_eq!(cfg.primes, vec![7]);
        assert_eq!(cfg.qs, vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(cfg.max_depth(7), 6);
    }

    #[test]
    fn validation_errors() {
        let with = |k: &str, v: &str| {
            let mut s = Settings::new();
            s.insert("command".into(), vec!["verify".into()]);
            s.insert(k.into(), vec![v.into()]);
            resolve(&s)
        };
        assert!(with("p", "4").is_err());
        assert!(with("q", "3,1").is_err());
        assert!(with("q", "1,0").is_err());
        assert!(with("max-sum-exponent", "20").is_err());
        assert!(with("target", "31").is_err());
        assert!(with("suite", "eq7").is_err());
        assert!(with("colour", "red").is_err());
        assert!(with("p", "3").is_ok());
    }

    #[test]
    fn default_depths_fit_the_budget() {
        assert_eq!(default_depth(3), 12);
        assert_eq!(default_depth(5), 8);
        assert_eq!(default_depth(7), 7);
    }
}
