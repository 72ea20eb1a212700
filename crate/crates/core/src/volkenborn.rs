//! Riemann-sum evaluation of the fermionic, signed and bosonic p-adic
//! integrals on `Z_p`.
//!
//! The depth-`N` sum over `0 <= y < p^N` is an analytic function of
//! `h = p^N` for the integrands supported here, so successive sums are
//! combined by Richardson extrapolation in `h` before the stopping rule is
//! applied. Plain sums gain about one digit per depth, which would put 12
//! certified digits out of reach of any reasonable summation budget; the
//! extrapolated values gain several digits per depth. Both sequences are
//! exposed by [`stability_report`].

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::padic::{LogSeries, PadicContext, PadicNumber};
use crate::qanalog::{q_bracket_int, q_bracket_neg, q_bracket_rational, q_pow_int, q_pow_rational, QParam};

/// Largest number of summands a single integral may request.
pub const SUM_BUDGET: u128 = 10_000_000;

/// Extra digits carried beyond the target inside the summation.
const GUARD: u32 = 8;
/// Number of trailing depths fed to the extrapolation.
const WINDOW: usize = 5;
const BLOCK: u64 = 2048;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Constant(BigRational),
    /// `q^(s y)`.
    QPower(i64),
    /// `[c + y]_q^e`.
    BracketMonomial { offset: BigRational, exponent: u32 },
    /// `[c + y]_q (log [c + y]_q - 1)` with the Iwasawa logarithm.
    GammaKernel { offset: BigRational },
    /// Values on residues mod `p^level`, indexed by `y mod p^level`.
    Tabulated { level: u32, values: Vec<PadicNumber> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Weight {
    None,
    /// `q^(-y)`.
    InverseQPower,
    /// `q^(-y-c)`.
    InverseQPowerShifted(BigRational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegrandSpec {
    pub family: Family,
    pub weight: Weight,
    /// Integrate `f(y + 1)` instead of `f(y)`.
    pub shift: bool,
}

impl IntegrandSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            weight: Weight::None,
            shift: false,
        }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(Family::Constant(c))
    }

    pub fn one() -> Self {
        Self::constant(BigRational::from_integer(1.into()))
    }

    pub fn q_power(s: i64) -> Self {
        Self::new(Family::QPower(s))
    }

    pub fn bracket_monomial(offset: BigRational, exponent: u32) -> Self {
        Self::new(Family::BracketMonomial { offset, exponent })
    }

    pub fn gamma_kernel(offset: BigRational) -> Self {
        Self::new(Family::GammaKernel { offset })
    }

    pub fn tabulated(level: u32, values: Vec<PadicNumber>) -> Self {
        Self::new(Family::Tabulated { level, values })
    }

    pub fn with_weight(mut self, weight: Weight) -> Self {
        self.weight = weight;
        self
    }

    pub fn shifted(mut self) -> Self {
        self.shift = true;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    /// `mu_{-q}`: weights `(-q)^y / [p^N]_{-q}`.
    Fermionic,
    /// `mu_{-1}`: weights `(-1)^y`.
    Signed,
    /// `mu_q`: weights `q^y / [p^N]_q`.
    Bosonic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralResult {
    pub value: PadicNumber,
    pub depth_used: u32,
    pub stability_valuation: i64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SumOptions {
    pub target: i64,
    pub max_depth: u32,
    /// Depths to add after the stopping rule first fires.
    pub extra_depth: u32,
}

impl SumOptions {
    pub fn new(target: i64, max_depth: u32) -> Self {
        Self {
            target,
            max_depth,
            extra_depth: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityRow {
    pub depth: u32,
    pub partial_sum: PadicNumber,
    /// `order(S_N - S_{N-1})`.
    pub plain_difference: Option<i64>,
    pub accelerated: PadicNumber,
    pub accelerated_difference: Option<i64>,
}

pub fn fermionic_integral(
    f: &IntegrandSpec,
    q: &QParam,
    target: i64,
    max_depth: u32,
) -> Result<IntegralResult> {
    integrate(f, Measure::Fermionic, Some(q), q.context(), SumOptions::new(target, max_depth))
}

/// `I_{-1}(f)`; q-dependent families are read at `q = 1`.
pub fn fermionic_integral_signed(
    f: &IntegrandSpec,
    ctx: PadicContext,
    target: i64,
    max_depth: u32,
) -> Result<IntegralResult> {
    integrate(f, Measure::Signed, None, ctx, SumOptions::new(target, max_depth))
}

pub fn bosonic_integral(
    f: &IntegrandSpec,
    q: &QParam,
    target: i64,
    max_depth: u32,
) -> Result<IntegralResult> {
    integrate(f, Measure::Bosonic, Some(q), q.context(), SumOptions::new(target, max_depth))
}

pub fn integrate(
    f: &IntegrandSpec,
    measure: Measure,
    q: Option<&QParam>,
    ctx: PadicContext,
    opts: SumOptions,
) -> Result<IntegralResult> {
    let plan = Plan::new(std::slice::from_ref(f), false, measure, q, ctx, opts)?;
    Ok(plan.run()?.remove(0))
}

/// `∫ w(y) [c + y]_q^n` for every `0 <= n <= max_exponent` from one pass over
/// the summation points. Each entry equals what [`integrate`] returns for the
/// corresponding single monomial.
pub fn moments(
    offset: &BigRational,
    max_exponent: u32,
    weight: Weight,
    measure: Measure,
    q: Option<&QParam>,
    ctx: PadicContext,
    opts: SumOptions,
) -> Result<Vec<IntegralResult>> {
    let spec = IntegrandSpec::bracket_monomial(offset.clone(), max_exponent).with_weight(weight);
    Plan::new(&[spec], true, measure, q, ctx, opts)?.run()
}

/// Partial sums `S_N` for every depth in `depths`, with and without
/// extrapolation.
pub fn stability_report(
    f: &IntegrandSpec,
    q: &QParam,
    measure: Measure,
    depths: std::ops::RangeInclusive<u32>,
) -> Result<Vec<StabilityRow>> {
    let ctx = q.context();
    let opts = SumOptions::new(ctx.precision() as i64, *depths.end());
    let q = (measure != Measure::Signed).then_some(q);
    let plan = Plan::new(std::slice::from_ref(f), false, measure, q, ctx, opts)?;
    let history = plan.sweep(*depths.end(), |_| false)?;
    let series = &history[0];
    let rows = depths
        .filter(|n| *n >= 1)
        .map(|n| {
            let i = (n - 1) as usize;
            let diff = |v: &[PadicNumber]| {
                (i > 0).then(|| v[i].diff_valuation(&v[i - 1]).expect("same context"))
            };
            StabilityRow {
                depth: n,
                partial_sum: series.plain[i].to_context(ctx).expect("same prime"),
                plain_difference: diff(&series.plain),
                accelerated: series.accelerated[i].to_context(ctx).expect("same prime"),
                accelerated_difference: diff(&series.accelerated),
            }
        })
        .collect();
    Ok(rows)
}

/// Checks `p^max_depth` against [`SUM_BUDGET`].
pub fn check_budget(p: u32, max_depth: u32) -> Result<()> {
    let points = (p as u128).checked_pow(max_depth).unwrap_or(u128::MAX);
    if points > SUM_BUDGET {
        return Err(Error::BudgetExceeded {
            points,
            limit: SUM_BUDGET,
        });
    }
    Ok(())
}

/// Richardson extrapolation to `h = 0` of values sampled at `h = p^(N0)`,
/// `p^(N0+1)`, ...; every divisor `1 - p^j` is a unit, so no digits are lost.
pub fn richardson(values: &[PadicNumber]) -> PadicNumber {
    let ctx = values[0].context();
    let one = PadicNumber::one(ctx);
    let mut t = values.to_vec();
    for j in 1..t.len() {
        let pj = PadicNumber::prime_power(j as i64, ctx);
        let scale = (&one - &pj).inverse().expect("1 - p^j is a unit");
        for i in (j..t.len()).rev() {
            t[i] = &(&t[i] - &(&pj * &t[i - 1])) * &scale;
        }
    }
    t.pop().expect("nonempty")
}

/// Values of the integrand at one point, shared by all entries of a plan.
enum Kind {
    Constant(PadicNumber),
    QPower(i64),
    Bracket {
        base: PadicNumber,
        scale: PadicNumber,
        exponent: u32,
        all: bool,
    },
    Gamma {
        base: PadicNumber,
        scale: PadicNumber,
        unit_required: bool,
    },
    Table {
        modulus: u64,
        values: Vec<PadicNumber>,
    },
}

struct Evaluator {
    kind: Kind,
    weight: Option<PadicNumber>,
    weight_inverse: bool,
    shift: u64,
}

impl Evaluator {
    fn new(spec: &IntegrandSpec, all: bool, q: Option<&QParam>, ctx: PadicContext) -> Result<Self> {
        let embed = |c: &BigRational| PadicNumber::from_bigrational(c, ctx);
        let offset_parts = |c: &BigRational| -> Result<(PadicNumber, PadicNumber)> {
            match q {
                Some(q) => Ok((q_bracket_rational(c, q)?, q_pow_rational(q, c)?)),
                None => Ok((
                    if c.is_zero() {
                        PadicNumber::zero(ctx)
                    } else {
                        embed(c)
                    },
                    PadicNumber::one(ctx),
                )),
            }
        };
        let kind = match &spec.family {
            Family::Constant(c) => Kind::Constant(embed(c)),
            Family::QPower(s) => Kind::QPower(*s),
            Family::BracketMonomial { offset, exponent } => {
                let (base, scale) = offset_parts(offset)?;
                Kind::Bracket {
                    base,
                    scale,
                    exponent: *exponent,
                    all,
                }
            }
            Family::GammaKernel { offset } => {
                let (base, scale) = offset_parts(offset)?;
                let unit_required = offset.is_zero() || embed(offset).order() >= 0;
                Kind::Gamma {
                    base,
                    scale,
                    unit_required,
                }
            }
            Family::Tabulated { level, values } => {
                let modulus = (ctx.prime() as u64)
                    .checked_pow(*level)
                    .filter(|m| *m as usize == values.len())
                    .ok_or_else(|| {
                        Error::IntegrandDomain(format!(
                            "table has {} values, level {} needs p^{}",
                            values.len(),
                            level,
                            level
                        ))
                    })?;
                let values = values
                    .iter()
                    .map(|v| v.to_context(ctx))
                    .collect::<Result<Vec<_>>>()?;
                Kind::Table { modulus, values }
            }
        };
        let (weight, weight_inverse) = match (&spec.weight, q) {
            (_, None) | (Weight::None, _) => (None, false),
            (Weight::InverseQPower, Some(_)) => (None, true),
            (Weight::InverseQPowerShifted(c), Some(q)) => {
                (Some(q_pow_rational(q, c)?.inverse()?), true)
            }
        };
        Ok(Self {
            kind,
            weight,
            weight_inverse,
            shift: spec.shift as u64,
        })
    }

    fn width(&self) -> usize {
        match self.kind {
            Kind::Bracket {
                exponent, all: true, ..
            } => exponent as usize + 1,
            _ => 1,
        }
    }

    /// `f(n)` given `q^n` and `q^-n` (both `None` when `q = 1`).
    fn eval(
        &self,
        n: u64,
        q_n: Option<&PadicNumber>,
        q_inv_n: Option<&PadicNumber>,
        bracket_n: &dyn Fn() -> PadicNumber,
        logs: &LogSeries,
        out: &mut Vec<PadicNumber>,
    ) -> Result<()> {
        let ctx = logs.context();
        let start = out.len();
        match &self.kind {
            Kind::Constant(c) => out.push(c.clone()),
            Kind::QPower(s) => out.push(match q_n {
                Some(qn) => qn.pow(*s)?,
                None => PadicNumber::one(ctx),
            }),
            Kind::Bracket {
                base,
                scale,
                exponent,
                all,
            } => {
                let b = base + &(scale * &bracket_n());
                if *all {
                    let mut power = PadicNumber::one(ctx);
                    out.push(power.clone());
                    for _ in 0..*exponent {
                        power = &power * &b;
                        out.push(power.clone());
                    }
                } else {
                    out.push(b.pow(*exponent as i64)?);
                }
            }
            Kind::Gamma {
                base,
                scale,
                unit_required,
            } => {
                let b = base + &(scale * &bracket_n());
                if b.is_zero() || (*unit_required && b.valuation()? != 0) {
                    return Err(Error::IntegrandDomain(format!(
                        "[c + y]_q is not a unit at y = {}",
                        n - self.shift
                    )));
                }
                let log = logs.log_iwasawa(&b)?;
                out.push(&b * &(&log - &PadicNumber::one(ctx)));
            }
            Kind::Table { modulus, values } => out.push(values[(n % modulus) as usize].clone()),
        }
        if self.weight_inverse {
            let mut w = q_inv_n.expect("weighted integrands need q").clone();
            if let Some(c) = &self.weight {
                w = &w * c;
            }
            for v in &mut out[start..] {
                *v = &*v * &w;
            }
        }
        Ok(())
    }
}

/// Per-integrand history of normalized sums over the depths computed so far.
struct Series {
    plain: Vec<PadicNumber>,
    accelerated: Vec<PadicNumber>,
}

struct Plan {
    out_ctx: PadicContext,
    ctx: PadicContext,
    measure: Measure,
    q: Option<QParam>,
    evaluators: Vec<Evaluator>,
    logs: LogSeries,
    inv_one_minus_q: Option<PadicNumber>,
    opts: SumOptions,
}

impl Plan {
    fn new(
        specs: &[IntegrandSpec],
        all: bool,
        measure: Measure,
        q: Option<&QParam>,
        out_ctx: PadicContext,
        opts: SumOptions,
    ) -> Result<Self> {
        let p = out_ctx.prime();
        check_budget(p, opts.max_depth)?;
        let total_depth = opts.max_depth;
        let depth_q = q.map(|q| q.depth()).unwrap_or(0);
        let mut precision = opts.target.max(1) as u32 + GUARD + depth_q;
        if measure == Measure::Bosonic {
            precision += total_depth;
        }
        let ctx = out_ctx.with_precision(precision);
        let q = match (measure, q) {
            (Measure::Signed, _) => None,
            (_, Some(q)) => {
                if q.context().prime() != p {
                    return Err(Error::ContextMismatch);
                }
                Some(q.at_precision(precision)?)
            }
            (_, None) => return Err(Error::IntegrandDomain("this measure needs q".into())),
        };
        let evaluators = specs
            .iter()
            .map(|s| Evaluator::new(s, all, q.as_ref(), ctx))
            .collect::<Result<Vec<_>>>()?;
        let inv_one_minus_q = q
            .as_ref()
            .map(|q| (&PadicNumber::one(ctx) - q.value()).inverse())
            .transpose()?;
        Ok(Self {
            out_ctx,
            ctx,
            measure,
            q,
            evaluators,
            logs: LogSeries::new(ctx),
            inv_one_minus_q,
            opts,
        })
    }

    fn width(&self) -> usize {
        self.evaluators.iter().map(Evaluator::width).sum()
    }

    /// Sums over `start <= y < end`, one entry per output.
    fn block(&self, start: u64, end: u64) -> Result<Vec<PadicNumber>> {
        let ctx = self.ctx;
        let width = self.width();
        let mut acc: Vec<Option<PadicNumber>> = vec![None; width];
        let mut values = Vec::with_capacity(width);
        let needs_inverse = self.evaluators.iter().any(|e| e.weight_inverse);
        let (mut q_y, q_inv) = match &self.q {
            Some(q) => (
                Some(q_pow_int(q, start as i64)),
                needs_inverse.then(|| q.value().inverse().expect("unit")),
            ),
            None => (None, None),
        };
        let mut q_inv_y = q_inv
            .as_ref()
            .map(|_| q_pow_int(self.q.as_ref().unwrap(), -(start as i64)));
        let one = PadicNumber::one(ctx);
        for y in start..end {
            let sign_negative = y % 2 == 1 && self.measure != Measure::Bosonic;
            values.clear();
            for e in &self.evaluators {
                let n = y + e.shift;
                let (q_n, q_inv_n) = match (&self.q, e.shift) {
                    (Some(q), 1) => (
                        q_y.as_ref().map(|v| v * q.value()),
                        q_inv_y.as_ref().map(|v| v * q_inv.as_ref().unwrap()),
                    ),
                    _ => (q_y.clone(), q_inv_y.clone()),
                };
                let bracket = || match (&q_n, &self.inv_one_minus_q) {
                    (Some(qn), Some(inv)) => &(&one - qn) * inv,
                    _ => PadicNumber::from_i64(n as i64, ctx),
                };
                e.eval(n, q_n.as_ref(), q_inv_n.as_ref(), &bracket, &self.logs, &mut values)?;
            }
            let weight = match (self.measure, &q_y) {
                (Measure::Signed, _) | (_, None) => None,
                (_, Some(qy)) => Some(qy),
            };
            for (slot, v) in acc.iter_mut().zip(values.drain(..)) {
                let mut term = match weight {
                    Some(w) => &v * w,
                    None => v,
                };
                if sign_negative {
                    term = -term;
                }
                *slot = Some(match slot.take() {
                    Some(s) => &s + &term,
                    None => term,
                });
            }
            if let Some(q) = &self.q {
                q_y = q_y.map(|v| &v * q.value());
                if let Some(inv) = &q_inv {
                    q_inv_y = q_inv_y.map(|v| &v * inv);
                }
            }
        }
        Ok(acc
            .into_iter()
            .map(|s| s.unwrap_or_else(|| PadicNumber::zero(ctx)))
            .collect())
    }

    fn normalizer(&self, depth: u32) -> PadicNumber {
        let count = (self.ctx.prime() as u64).pow(depth);
        match (&self.q, self.measure) {
            (Some(q), Measure::Fermionic) => q_bracket_neg(count, q),
            (Some(q), Measure::Bosonic) => q_bracket_int(count as i64, q),
            _ => PadicNumber::one(self.ctx),
        }
    }

    /// Computes depths `1, 2, ...` until `done` reports true for the history
    /// or `max_depth` is reached.
    fn sweep(&self, max_depth: u32, mut done: impl FnMut(&[Series]) -> bool) -> Result<Vec<Series>> {
        let p = self.ctx.prime() as u64;
        let width = self.width();
        let mut raw: Vec<Option<PadicNumber>> = vec![None; width];
        let mut history: Vec<Series> = (0..width)
            .map(|_| Series {
                plain: Vec::new(),
                accelerated: Vec::new(),
            })
            .collect();
        for depth in 1..=max_depth {
            let lo = if depth == 1 { 0 } else { p.pow(depth - 1) };
            let hi = p.pow(depth);
            let starts: Vec<u64> = (lo..hi).step_by(BLOCK as usize).collect();
            let blocks = starts
                .par_iter()
                .map(|&s| self.block(s, (s + BLOCK).min(hi)))
                .collect::<Vec<_>>();
            for block in blocks {
                for (slot, v) in raw.iter_mut().zip(block?) {
                    *slot = Some(match slot.take() {
                        Some(s) => &s + &v,
                        None => v,
                    });
                }
            }
            let norm_inv = self.normalizer(depth).inverse()?;
            for (series, r) in history.iter_mut().zip(&raw) {
                let s = r.as_ref().expect("at least one point") * &norm_inv;
                series.plain.push(s);
                let from = series.plain.len().saturating_sub(WINDOW);
                series
                    .accelerated
                    .push(richardson(&series.plain[from..]));
            }
            if done(&history) {
                break;
            }
        }
        Ok(history)
    }

    fn run(&self) -> Result<Vec<IntegralResult>> {
        let target = self.opts.target;
        let extra = self.opts.extra_depth as usize;
        let width = self.width();
        let mut fired: Vec<Option<usize>> = vec![None; width];
        let history = self.sweep(self.opts.max_depth, |h| {
            for (f, s) in fired.iter_mut().zip(h) {
                if f.is_none() && stability(&s.accelerated) >= target {
                    *f = Some(s.accelerated.len());
                }
            }
            fired
                .iter()
                .all(|f| f.is_some_and(|d| h[0].accelerated.len() >= d + extra))
        })?;
        Ok(history
            .iter()
            .zip(&fired)
            .map(|(s, f)| {
                let reached = s.accelerated.len();
                let depth = match f {
                    Some(d) => (d + extra).min(reached),
                    None => reached,
                };
                let stab = stability(&s.accelerated[..depth]);
                let converged = f.is_some() && stab >= target;
                let best = &s.accelerated[depth - 1];
                let value = if stab == i64::MIN { best.clone() } else { best.truncate_absolute(stab) };
                let value = value
                    .to_context(self.out_ctx)
                    .expect("same prime");
                IntegralResult {
                    value,
                    depth_used: depth as u32,
                    stability_valuation: stab,
                    converged,
                }
            })
            .collect())
    }
}

/// `min(order(A_N - A_{N-1}), order(A_{N-1} - A_{N-2}))`, or `i64::MIN`
/// with fewer than three depths.
fn stability(values: &[PadicNumber]) -> i64 {
    let n = values.len();
    if n < 3 {
        return i64::MIN;
    }
    let d = |i: usize| values[i].diff_valuation(&values[i - 1]).expect("same context");
    d(n - 1).min(d(n - 2))
}
