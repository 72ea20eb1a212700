//! The p-adic q-log-gamma functions
//!
//! ```text
//! G_{p,q}(x) = ∫ [x+z]_q (log [x+z]_q - 1) dmu_{-q}(z)
//! T_{p,q}(x) = ∫ q^(-y-x) [x+y]_q (log [x+y]_q - 1) dmu_q(y)
//! ```
//!
//! for `x` in `Q_p \ Z_p`, by direct integration and by their series in
//! inverse powers of `[x]_q`. `log` is the Iwasawa logarithm throughout.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::euler::{certified, gate_on_convergence, params, q_bernoulli_numbers, q_euler_number};
use crate::padic::{log_iwasawa, valuation_of_int, PadicNumber};
use crate::qanalog::{q_bracket_int, q_bracket_rational, q_pow_rational, QParam};
use crate::volkenborn::{
    integrate, IntegralResult, IntegrandSpec, Measure, SumOptions, Weight,
};

/// Default cap on the number of series terms.
pub const SERIES_CAP: usize = 200;

const SERIES_GUARD: u32 = 6;

/// A point of `Q_p \ Z_p` compatible with the active `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaArgument {
    x: BigRational,
    valuation: i64,
}

impl GammaArgument {
    /// Requires `v_p(x) <= -1` and `v_p(x) + m >= 1`.
    pub fn new(x: BigRational, q: &QParam) -> Result<Self> {
        let p = q.context().prime();
        if x.is_zero() {
            return Err(Error::GammaDomain("x = 0 lies in Z_p".into()));
        }
        let valuation =
            valuation_of_int(x.numer(), p) as i64 - valuation_of_int(x.denom(), p) as i64;
        if valuation >= 0 {
            return Err(Error::GammaDomain(format!("x = {x} lies in Z_p")));
        }
        if valuation + (q.depth() as i64) < 1 {
            return Err(Error::GammaDomain(format!(
                "v_p(x) + m = {} < 1 for x = {x}",
                valuation + q.depth() as i64
            )));
        }
        Ok(Self { x, valuation })
    }

    pub fn value(&self) -> &BigRational {
        &self.x
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    /// `x + 1`, which stays in the domain.
    pub fn successor(&self) -> Self {
        Self {
            x: &self.x + BigRational::one(),
            valuation: self.valuation,
        }
    }
}

/// First coefficient of the series: `[x]_q + q^x E_{1,q}` as derived, or
/// `[x]_q - q^x / [2]_{q^2}` as it is sometimes printed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoefficientVariant {
    Derived,
    AsPrinted,
}

impl CoefficientVariant {
    pub fn name(self) -> &'static str {
        match self {
            CoefficientVariant::Derived => "derived_coefficient",
            CoefficientVariant::AsPrinted => "as_printed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesEvaluation {
    pub value: PadicNumber,
    pub terms_used: usize,
    /// Lower bound for the valuation of every omitted term.
    pub tail_valuation_bound: i64,
    pub variant: CoefficientVariant,
}

/// `G_{p,q}(x)` as a fermionic Riemann sum.
pub fn gamma_direct(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    max_depth: u32,
) -> Result<IntegralResult> {
    gamma_direct_with(x, q, SumOptions::new(target, max_depth))
}

pub fn gamma_direct_with(x: &GammaArgument, q: &QParam, opts: SumOptions) -> Result<IntegralResult> {
    integrate(&gamma_integrand(x), Measure::Fermionic, Some(q), q.context(), opts)
}

/// `[x+y]_q (log [x+y]_q - 1)`, integrated against `mu_{-q}`.
pub fn gamma_integrand(x: &GammaArgument) -> IntegrandSpec {
    IntegrandSpec::gamma_kernel(x.x.clone())
}

/// `n |v| - floor(log_p(n(n+1)))`, a nondecreasing lower bound for the
/// valuation of the `n`-th series term.
fn term_floor(n: usize, v: i64, p: u32) -> i64 {
    let mut e = 0;
    let prod = (n as u128) * (n as u128 + 1);
    let mut acc = p as u128;
    while acc <= prod {
        acc *= p as u128;
        e += 1;
    }
    n as i64 * v.abs() - e
}

/// `G_{p,q}(x)` from its series in `1/[x]_q`, summed until every omitted term
/// is below `p^max(target, N)`.
pub fn gamma_series(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    variant: CoefficientVariant,
) -> Result<SeriesEvaluation> {
    gamma_series_capped(x, q, target, variant, SERIES_CAP)
}

pub fn gamma_series_capped(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    variant: CoefficientVariant,
    cap: usize,
) -> Result<SeriesEvaluation> {
    let ctx = q.context();
    let p = ctx.prime();
    let goal = target.max(ctx.precision() as i64);
    let v = x.valuation;
    let mut terms = 0usize;
    while term_floor(terms + 1, v, p) < goal {
        terms += 1;
        if terms > cap {
            return Err(Error::SeriesBudgetExceeded { cap });
        }
    }
    let value = series_value(x, q, variant, terms, goal)?;
    Ok(SeriesEvaluation {
        value,
        terms_used: terms,
        tail_valuation_bound: term_floor(terms + 1, v, p),
        variant,
    })
}

/// The series truncated after exactly `terms` terms of the sum, with each
/// term checked against its valuation floor.
pub fn series_value(
    x: &GammaArgument,
    q: &QParam,
    variant: CoefficientVariant,
    terms: usize,
    goal: i64,
) -> Result<PadicNumber> {
    let ctx = q.context();
    let p = ctx.prime();
    let wide = goal.max(1) as u32 + q.depth() + SERIES_GUARD;
    let qw = q.at_precision(wide.max(ctx.precision()))?;
    let c = qw.context();
    let one = PadicNumber::one(c);
    let bx = q_bracket_rational(&x.x, &qw)?;
    let qx = q_pow_rational(&qw, &x.x)?;
    let log_bx = log_iwasawa(&bx)?;
    let first = match variant {
        CoefficientVariant::Derived => &bx + &(&qx * &q_euler_number(1, &qw)?),
        CoefficientVariant::AsPrinted => {
            let two_q2 = &one + &qw.value().pow(2)?;
            &bx - &qx.try_div(&two_q2)?
        }
    };
    let mut total = &(&first * &log_bx) - &bx;
    let neg_qx = -&qx;
    let inv_bx = bx.inverse()?;
    let mut ratio_power = neg_qx.clone();
    let mut inv_power = one.clone();
    for n in 1..=terms {
        ratio_power = &ratio_power * &neg_qx;
        inv_power = &inv_power * &inv_bx;
        let nn = (n * (n + 1)) as i64;
        let coeff = PadicNumber::from_rational(1, nn, c)?;
        let term = &(&(&ratio_power * &coeff) * &q_euler_number(n + 1, &qw)?) * &inv_power;
        let floor = n as i64 * x.valuation.abs() - valuation_of_int(&BigInt::from(nn), p) as i64;
        if term.order() < floor {
            return Err(Error::TermBound {
                n,
                actual: term.order(),
                bound: floor,
            });
        }
        total = &total + &term;
    }
    total.truncate_absolute(goal.max(ctx.precision() as i64)).to_context(ctx)
}

/// `[2]_q [x]_q (log [x]_q - 1)`.
fn functional_rhs(x: &GammaArgument, q: &QParam) -> Result<PadicNumber> {
    let one = PadicNumber::one(q.context());
    let bx = q_bracket_rational(&x.x, q)?;
    let log_bx = log_iwasawa(&bx)?;
    Ok(&(&q_bracket_int(2, q) * &bx) * &(&log_bx - &one))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Evaluator {
    Direct,
    Series(CoefficientVariant),
}

impl Evaluator {
    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Direct => "direct",
            Evaluator::Series(CoefficientVariant::Derived) => "series",
            Evaluator::Series(CoefficientVariant::AsPrinted) => "series_as_printed",
        }
    }
}

/// `q G(x+1) + G(x) = [2]_q [x]_q (log [x]_q - 1)`. The printed-coefficient
/// series only records its residual.
pub fn verify_gamma_functional_equation(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    evaluator: Evaluator,
    max_depth: u32,
) -> AuditReport {
    let report = params(AuditReport::new("eq12"), q)
        .param("x", &x.x)
        .param("evaluator", evaluator.name());
    let rhs = match functional_rhs(x, q) {
        Ok(r) => r,
        Err(e) => return report.failed(target, &e),
    };
    let next = x.successor();
    match evaluator {
        Evaluator::Direct => {
            let both = gamma_direct(x, q, target, max_depth)
                .and_then(|a| Ok((a, gamma_direct(&next, q, target, max_depth)?)));
            match both {
                Ok((a, b)) => {
                    let lhs = &(q.value() * &b.value) + &a.value;
                    let report = report
                        .detail("depth_used", a.depth_used.max(b.depth_used))
                        .compare(&lhs, &rhs, target, false);
                    gate_on_convergence(gate_on_convergence(report, &a), &b)
                }
                Err(e) => report.failed(target, &e),
            }
        }
        Evaluator::Series(variant) => {
            let both = gamma_series(x, q, target, variant)
                .and_then(|a| Ok((a, gamma_series(&next, q, target, variant)?)));
            match both {
                Ok((a, b)) => {
                    let lhs = &(q.value() * &b.value) + &a.value;
                    report
                        .detail("terms_used", a.terms_used.max(b.terms_used))
                        .compare(&lhs, &rhs, target, variant == CoefficientVariant::AsPrinted)
                }
                Err(e) => {
                    if variant == CoefficientVariant::AsPrinted {
                        let mut r = report.failed(target, &e);
                        r.verdict = None;
                        r
                    } else {
                        report.failed(target, &e)
                    }
                }
            }
        }
    }
}

/// `q^x (E_{1,q} + 1/[2]_{q^2}) log [x]_q`, the amount by which the printed
/// first coefficient undershoots the derived one.
pub fn printed_coefficient_gap(x: &GammaArgument, q: &QParam) -> Result<PadicNumber> {
    let one = PadicNumber::one(q.context());
    let two_q2 = &one + &q.value().pow(2)?;
    let qx = q_pow_rational(q, &x.x)?;
    let log_bx = log_iwasawa(&q_bracket_rational(&x.x, q)?)?;
    let inner = &q_euler_number(1, q)? + &two_q2.inverse()?;
    Ok(&(&qx * &inner) * &log_bx)
}

/// Series (derived coefficient) against the direct integral, plus a
/// report-only record comparing `direct - series(as printed)` with
/// [`printed_coefficient_gap`].
pub fn verify_gamma_series(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    max_depth: u32,
) -> Vec<AuditReport> {
    let base = params(AuditReport::new("thmA"), q).param("x", &x.x);
    let direct = match gamma_direct(x, q, target, max_depth) {
        Ok(d) => d,
        Err(e) => return vec![base.failed(target, &e)],
    };
    let derived = match gamma_series(x, q, target, CoefficientVariant::Derived) {
        Ok(s) => s,
        Err(e) => return vec![base.failed(target, &e)],
    };
    let main = base
        .clone()
        .detail("depth_used", direct.depth_used)
        .detail("stability_valuation", direct.stability_valuation)
        .detail("terms_used", derived.terms_used)
        .detail("tail_valuation_bound", derived.tail_valuation_bound)
        .compare(&derived.value, &direct.value, target, false);
    let main = gate_on_convergence(main, &direct);

    let mut printed = base.clone();
    printed.identity = "thmA-as-printed".into();
    let printed = match (
        gamma_series(x, q, target, CoefficientVariant::AsPrinted),
        printed_coefficient_gap(x, q),
    ) {
        (Ok(s), Ok(gap)) => {
            let residual = &direct.value - &s.value;
            printed
                .detail("as_printed", s.value.to_string())
                .detail("derived_coefficient", derived.value.to_string())
                .detail("direct", direct.value.to_string())
                .compare(&residual, &gap, target, true)
        }
        (Err(e), _) | (_, Err(e)) => {
            let mut r = printed.failed(target, &e);
            r.verdict = None;
            r
        }
    };
    vec![main, printed]
}

/// The decomposition of the gamma kernel at `x + z` for an integer `z`,
/// truncated after `k` terms; the target is lowered to what the truncation
/// supports.
pub fn verify_decomposition(
    x: &GammaArgument,
    q: &QParam,
    z: i64,
    k: usize,
    target: i64,
) -> AuditReport {
    let report = params(AuditReport::new("eq10"), q)
        .param("x", &x.x)
        .param("z", z)
        .param("K", k);
    match decomposition_sides(x, q, z, k) {
        Ok((lhs, rhs, tail)) => report
            .detail("requested_target", target)
            .compare(&lhs, &rhs, target.min(tail), false),
        Err(e) => report.failed(target, &e),
    }
}

fn decomposition_sides(
    x: &GammaArgument,
    q: &QParam,
    z: i64,
    k: usize,
) -> Result<(PadicNumber, PadicNumber, i64)> {
    let ctx = q.context();
    let p = ctx.prime();
    let one = PadicNumber::one(ctx);
    let xz = &x.x + BigRational::from_integer(BigInt::from(z));
    let b_xz = q_bracket_rational(&xz, q)?;
    let lhs = &b_xz * &(&log_iwasawa(&b_xz)? - &one);

    let bx = q_bracket_rational(&x.x, q)?;
    let qx = q_pow_rational(q, &x.x)?;
    let qx_bz = &qx * &q_bracket_int(z, q);
    let u = qx_bz.try_div(&bx)?;
    let mut series = PadicNumber::zero(ctx);
    let mut u_power = u.clone();
    for n in 1..=k {
        u_power = &u_power * &u;
        let nn = (n * (n + 1)) as i64;
        let coeff = PadicNumber::from_rational(if n % 2 == 1 { 1 } else { -1 }, nn, ctx)?;
        series = &series + &(&coeff * &u_power);
    }
    let log_bx = log_iwasawa(&bx)?;
    let rhs = &(&(&(&qx_bz + &(&bx * &series)) + &(&(&bx + &qx_bz) * &log_bx)) - &bx) - &qx_bz;
    // first omitted term: [x] u^(k+2) / ((k+1)(k+2))
    let w = u.order();
    let n = k + 1;
    let tail = bx.order() + (n as i64 + 1) * w
        - valuation_of_int(&BigInt::from((n * (n + 1)) as i64), p) as i64;
    Ok((lhs, rhs, tail))
}

/// `T_{p,q}(x)` as a bosonic Riemann sum of `q^(-y-x) [x+y]_q (log [x+y]_q - 1)`.
pub fn t_gamma_direct(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    max_depth: u32,
) -> Result<IntegralResult> {
    t_gamma_direct_with(x, q, SumOptions::new(target, max_depth))
}

pub fn t_gamma_direct_with(x: &GammaArgument, q: &QParam, opts: SumOptions) -> Result<IntegralResult> {
    integrate(&t_gamma_integrand(x), Measure::Bosonic, Some(q), q.context(), opts)
}

/// The gamma kernel weighted by `q^(-y-x)`, integrated against `mu_q`.
pub fn t_gamma_integrand(x: &GammaArgument) -> IntegrandSpec {
    IntegrandSpec::gamma_kernel(x.x.clone()).with_weight(Weight::InverseQPowerShifted(x.x.clone()))
}

/// Both sides of the conjectured series for `T_{p,q}` at one depth setting.
struct ConjectureSides {
    direct: IntegralResult,
    series: PadicNumber,
    terms: usize,
    beta_depth: u32,
}

fn conjecture_sides(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    max_depth: u32,
    extra_depth: u32,
) -> Result<ConjectureSides> {
    let ctx = q.context();
    let p = ctx.prime();
    let v = x.valuation;
    // beta_n may have valuation -1, and the leading terms divide by [x]_q
    let goal = target + 2;
    let mut terms = 0usize;
    while term_floor(terms + 1, v, p) - 1 < goal {
        terms += 1;
        if terms > SERIES_CAP {
            return Err(Error::SeriesBudgetExceeded { cap: SERIES_CAP });
        }
    }
    let beta_opts = SumOptions {
        target: goal,
        max_depth,
        extra_depth,
    };
    let betas = q_bernoulli_numbers(terms + 1, q, beta_opts)?;
    let direct = certified(
        t_gamma_direct_with(
            x,
            q,
            SumOptions {
                target,
                max_depth,
                extra_depth,
            },
        )?,
        target,
    )?;

    let one = PadicNumber::one(ctx);
    let bx = q_bracket_rational(&x.x, q)?;
    let qx = q_pow_rational(q, &x.x)?;
    let log_bx = log_iwasawa(&bx)?;
    let lead = &qx.inverse()? * &(&bx * &betas[0].value);
    let mut total = &(&(&lead + &betas[1].value) * &log_bx) - &lead;
    let inv_bx = bx.inverse()?;
    let mut qx_power = one.clone();
    let mut inv_power = one;
    for n in 1..=terms {
        qx_power = &qx_power * &qx;
        inv_power = &inv_power * &inv_bx;
        let nn = (n * (n + 1)) as i64;
        let coeff = PadicNumber::from_rational(if n % 2 == 1 { 1 } else { -1 }, nn, ctx)?;
        total = &total + &(&(&(&coeff * &qx_power) * &betas[n + 1].value) * &inv_power);
    }
    Ok(ConjectureSides {
        direct,
        series: total,
        terms,
        beta_depth: betas.iter().map(|b| b.depth_used).max().unwrap_or(0),
    })
}

/// Compares the direct `T_{p,q}(x)` with its conjectured series. The record
/// carries no verdict. `diff_valuation` is the raw difference valuation
/// capped at `target`, the level to which both sides are certified, and the
/// same quantity is recomputed with every Riemann sum taken one depth further.
pub fn t_gamma_series_conjecture(
    x: &GammaArgument,
    q: &QParam,
    target: i64,
    max_depth: u32,
) -> Result<AuditReport> {
    let base = conjecture_sides(x, q, target, max_depth, 0)?;
    let raw = base.direct.value.diff_valuation(&base.series)?;
    let mut report = params(AuditReport::new("t-conjecture"), q)
        .param("x", &x.x)
        .compare(&base.direct.value, &base.series, target, true);
    report.diff_valuation = Some(raw.min(target));
    report = report
        .detail("raw_diff_valuation", raw)
        .detail("direct_depth_used", base.direct.depth_used)
        .detail("direct_stability_valuation", base.direct.stability_valuation)
        .detail("beta_depth_used", base.beta_depth)
        .detail("series_terms", base.terms);
    // probe: one more depth for every sum
    let probe = conjecture_sides(x, q, target, max_depth, 1);
    report = match probe {
        Ok(bumped) => {
            let raw_bumped = bumped.direct.value.diff_valuation(&bumped.series)?;
            report
                .detail("bumped_diff_valuation", raw_bumped.min(target))
                .detail("bumped_raw_diff_valuation", raw_bumped)
                .detail("bumped_direct_depth_used", bumped.direct.depth_used)
        }
        Err(e) => report.detail("bumped_error", e.to_string()),
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicContext;
    use crate::qanalog::{q_make, rational};

    fn ctx(p: i64, n: i64) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn argument_domain() {
        let q = q_make(1, 2, ctx(3, 30)).unwrap();
        assert!(GammaArgument::new(rational(1, 3).unwrap(), &q).is_ok());
        assert!(matches!(
            GammaArgument::new(rational(2, 1).unwrap(), &q),
            Err(Error::GammaDomain(_))
        ));
        // v = -2 needs m >= 3
        assert!(GammaArgument::new(rational(1, 9).unwrap(), &q).is_err());
        let q3 = q_make(1, 3, ctx(3, 30)).unwrap();
        assert_eq!(
            GammaArgument::new(rational(1, 9).unwrap(), &q3).unwrap().valuation(),
            -2
        );
    }

    #[test]
    fn term_floor_is_monotone() {
        for p in [3u32, 5, 7] {
            for v in [1i64, 2] {
                for n in 1..300 {
                    assert!(term_floor(n + 1, v, p) >= term_floor(n, v, p));
                }
            }
        }
    }

    #[test]
    fn bracket_of_argument_has_its_valuation() {
        let q = q_make(1, 2, ctx(3, 30)).unwrap();
        let bx = q_bracket_rational(&rational(1, 3).unwrap(), &q).unwrap();
        assert_eq!(bx.valuation().unwrap(), -1);
    }

    #[test]
    fn series_matches_direct_at_one_point() {
        let q = q_make(1, 2, ctx(3, 30)).unwrap();
        let x = GammaArgument::new(rational(1, 3).unwrap(), &q).unwrap();
        let direct = gamma_direct(&x, &q, 12, 12).unwrap();
        let series = gamma_series(&x, &q, 12, CoefficientVariant::Derived).unwrap();
        assert!(direct.converged);
        assert!(series.value.diff_valuation(&direct.value).unwrap() >= 12);
        assert!(series.tail_valuation_bound >= 30);
    }
}
