//! q-Euler polynomials and numbers, classical Euler and Bernoulli numbers,
//! q-Bernoulli numbers from the bosonic integral, and the formal expansion of
//! `(1+x) log(1+x)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::audit::{AuditReport, Verdict};
use crate::error::{Error, Result};
use crate::padic::PadicNumber;
use crate::qanalog::{q_bracket_int, q_pow_rational, QParam};
use crate::volkenborn::{integrate, moments, IntegralResult, IntegrandSpec, Measure, SumOptions, Weight};

pub type Rational = BigRational;

/// Default largest index for the classical recurrences.
pub const CLASSICAL_BOUND: usize = 64;
/// Largest degree accepted by [`verify_log_series`].
pub const LOG_SERIES_BOUND: usize = 200;

/// Extra digits carried through the alternating sum of the closed form.
const CLOSED_FORM_GUARD: u32 = 6;

/// Which exponent the closed form of `E_{m,q}(x)` uses in its `i`-th term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EulerVariant {
    /// `q^(i x)`, the exponent produced by expanding `[x + y]_q^m`.
    Derived,
    /// `q^x` in every term.
    AsPrinted,
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 0..n {
        let next = &row[k] * BigInt::from(n - k) / BigInt::from(k + 1);
        row.push(next);
    }
    row
}

fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `E_n` from `2/(e^t + 1) = sum E_n t^n / n!`.
pub fn classical_euler(n: usize) -> Result<Rational> {
    classical_euler_bounded(n, CLASSICAL_BOUND)
}

pub fn classical_euler_bounded(n: usize, bound: usize) -> Result<Rational> {
    if n > bound {
        return Err(Error::BoundExceeded { n, bound });
    }
    Ok(euler_table(n).pop().expect("nonempty"))
}

fn euler_table(n: usize) -> Vec<Rational> {
    let mut e = vec![int(1)];
    for k in 1..=n {
        let row = binomial_row(k);
        let s: Rational = (0..k).map(|j| Rational::from_integer(row[j].clone()) * &e[j]).sum();
        e.push(-s / int(2));
    }
    e
}

/// `B_n` with `B_1 = -1/2`.
pub fn classical_bernoulli(n: usize) -> Result<Rational> {
    classical_bernoulli_bounded(n, CLASSICAL_BOUND)
}

pub fn classical_bernoulli_bounded(n: usize, bound: usize) -> Result<Rational> {
    if n > bound {
        return Err(Error::BoundExceeded { n, bound });
    }
    let mut b = vec![int(1)];
    for k in 1..=n {
        let row = binomial_row(k + 1);
        let s: Rational = (0..k).map(|j| Rational::from_integer(row[j].clone()) * &b[j]).sum();
        b.push(-s / int(k as i64 + 1));
    }
    Ok(b.pop().expect("nonempty"))
}

/// `E_{m,q}(x) = [2]_q (1-q)^(-m) sum_i C(m,i) (-1)^i q^(i x) / (1 + q^(i+1))`.
///
/// The alternating sum cancels down to valuation `m * depth(q)`, so it is
/// formed with that many extra digits; the result carries the full working
/// precision of `q`'s context.
pub fn q_euler_polynomial(
    m: usize,
    x: &Rational,
    q: &QParam,
    variant: EulerVariant,
) -> Result<PadicNumber> {
    let ctx = q.context();
    let wide = ctx.precision() + m as u32 * q.depth() + CLOSED_FORM_GUARD;
    let qw = q.at_precision(wide)?;
    let c = qw.context();
    let one = PadicNumber::one(c);
    let row = binomial_row(m);
    let mut sum: Option<PadicNumber> = None;
    let mut q_i1 = qw.value().clone();
    for (i, binom) in row.iter().enumerate() {
        let exponent = match variant {
            EulerVariant::Derived => x * int(i as i64),
            EulerVariant::AsPrinted => x.clone(),
        };
        let mut coeff = PadicNumber::from_bigint(binom, c);
        if i % 2 == 1 {
            coeff = -coeff;
        }
        let term = (&coeff * &q_pow_rational(&qw, &exponent)?).try_div(&(&one + &q_i1))?;
        sum = Some(match sum {
            Some(s) => &s + &term,
            None => term,
        });
        q_i1 = &q_i1 * qw.value();
    }
    let two_q = &one + qw.value();
    let scale = (&one - qw.value()).pow(-(m as i64))?;
    let value = &(&two_q * &sum.expect("m + 1 terms")) * &scale;
    value.to_context(ctx)
}

/// `E_{n,q} = E_{n,q}(0)`.
pub fn q_euler_number(n: usize, q: &QParam) -> Result<PadicNumber> {
    q_euler_polynomial(n, &Rational::zero(), q, EulerVariant::Derived)
}

/// Closed form against the fermionic oracle `∫ [x + y]_q^m dmu_{-q}(y)` for
/// every `m <= max_m` at one argument.
pub fn verify_q_euler_oracle(
    max_m: usize,
    x: &Rational,
    q: &QParam,
    target: i64,
    max_depth: u32,
) -> Result<Vec<AuditReport>> {
    let oracle = moments(
        x,
        max_m as u32,
        Weight::None,
        Measure::Fermionic,
        Some(q),
        q.context(),
        SumOptions::new(target, max_depth),
    )?;
    let mut reports = Vec::with_capacity(max_m + 1);
    for (m, integral) in oracle.iter().enumerate() {
        let closed = q_euler_polynomial(m, x, q, EulerVariant::Derived)?;
        let report = params(AuditReport::new("eq3"), q)
            .param("m", m)
            .param("x", x)
            .detail("depth_used", integral.depth_used)
            .detail("stability_valuation", integral.stability_valuation)
            .compare(&closed, &integral.value, target, false);
        reports.push(gate_on_convergence(report, integral));
    }
    Ok(reports)
}

pub(crate) fn params(report: AuditReport, q: &QParam) -> AuditReport {
    report
        .param("p", q.context().prime())
        .param("q", q.spec())
        .param("precision", q.context().precision())
}

/// An oracle that did not stabilize cannot certify a PASS.
pub(crate) fn gate_on_convergence(mut report: AuditReport, integral: &IntegralResult) -> AuditReport {
    if integral.converged {
        return report;
    }
    if report.verdict == Some(Verdict::Pass) {
        report.verdict = Some(Verdict::Fail);
        report
            .details
            .insert("error".into(), "oracle did not stabilize".into());
    }
    report.mark_not_stabilized()
}

/// `q E_{n,q}(1) + E_{n,q} = [2]_q [n = 0]`.
pub fn verify_translation_identity(n: usize, q: &QParam, target: i64) -> Result<AuditReport> {
    let ctx = q.context();
    let at_one = q_euler_polynomial(n, &int(1), q, EulerVariant::Derived)?;
    let at_zero = q_euler_number(n, q)?;
    let lhs = &(q.value() * &at_one) + &at_zero;
    let rhs = if n == 0 {
        q_bracket_int(2, q)
    } else {
        PadicNumber::zero(ctx)
    };
    Ok(params(AuditReport::new("eq8"), q)
        .param("n", n)
        .compare(&lhs, &rhs, target, false))
}

/// `v_p(E_{n,q} - E_n)` for `q = 1 + p^M`, against the floor `M - slack`.
pub fn verify_euler_limit(n: usize, q: &QParam, slack: i64) -> Result<AuditReport> {
    let depth = q.depth() as i64;
    let lhs = q_euler_number(n, q)?;
    let rhs = PadicNumber::from_bigrational(&classical_euler(n)?, q.context());
    Ok(params(AuditReport::new("limits"), q)
        .param("quantity", "euler")
        .param("n", n)
        .compare(&lhs, &rhs, depth - slack, false))
}

/// `beta_{n,q} = ∫ q^(-y) [y]_q^n dmu_q(y)`; an unstabilized sum is an error.
pub fn q_bernoulli(n: usize, q: &QParam, target: i64, max_depth: u32) -> Result<IntegralResult> {
    let f = IntegrandSpec::bracket_monomial(Rational::zero(), n as u32)
        .with_weight(Weight::InverseQPower);
    let r = integrate(&f, Measure::Bosonic, Some(q), q.context(), SumOptions::new(target, max_depth))?;
    certified(r, target)
}

/// `beta_{0,q}, ..., beta_{n_max,q}` from one pass of bosonic sums.
pub fn q_bernoulli_numbers(
    n_max: usize,
    q: &QParam,
    opts: SumOptions,
) -> Result<Vec<IntegralResult>> {
    moments(
        &Rational::zero(),
        n_max as u32,
        Weight::InverseQPower,
        Measure::Bosonic,
        Some(q),
        q.context(),
        opts,
    )?
    .into_iter()
    .map(|r| certified(r, opts.target))
    .collect()
}

pub(crate) fn certified(r: IntegralResult, target: i64) -> Result<IntegralResult> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NotStabilized {
            depth: r.depth_used,
            stability: r.stability_valuation,
            target,
        })
    }
}

/// `beta_{0,q} log q = q - 1` and, at `q = 1 + p^M`, `beta_{1,q}` within
/// `M - slack` of `B_1 = -1/2`.
pub fn verify_bernoulli_checks(
    q: &QParam,
    target: i64,
    max_depth: u32,
    slack: i64,
) -> Result<Vec<AuditReport>> {
    let ctx = q.context();
    let mut out = Vec::new();
    let opts = SumOptions::new(target, max_depth);
    let betas = match q_bernoulli_numbers(1, q, opts) {
        Ok(b) => b,
        Err(e) => {
            return Ok(vec![params(AuditReport::new("beta0"), q).failed(target, &e)]);
        }
    };
    let lhs = &betas[0].value * q.log_q();
    let rhs = q.value() - &PadicNumber::one(ctx);
    out.push(
        params(AuditReport::new("beta0"), q)
            .detail("depth_used", betas[0].depth_used)
            .compare(&lhs, &rhs, target, false),
    );
    if q.t() == 1 {
        let b1 = PadicNumber::from_bigrational(&classical_bernoulli(1)?, ctx);
        out.push(
            params(AuditReport::new("limits"), q)
                .param("quantity", "beta1")
                .detail("depth_used", betas[1].depth_used)
                .compare(&betas[1].value, &b1, q.depth() as i64 - slack, false),
        );
    }
    Ok(out)
}

/// A truncated power series with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSeries {
    pub coefficients: Vec<Rational>,
}

impl FormalSeries {
    pub fn degree_bound(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// `log(1 + x) = sum (-1)^(k+1) x^k / k`.
    pub fn log_one_plus(k: usize) -> Self {
        let coefficients = (0..=k)
            .map(|j| match j {
                0 => Rational::zero(),
                j => Rational::new(BigInt::from(if j % 2 == 1 { 1 } else { -1 }), BigInt::from(j)),
            })
            .collect();
        Self { coefficients }
    }

    /// Cauchy product truncated to the smaller degree bound.
    pub fn mul(&self, other: &Self) -> Self {
        let k = self.degree_bound().min(other.degree_bound());
        let coefficients = (0..=k)
            .map(|j| {
                (0..=j)
                    .map(|i| &self.coefficients[i] * &other.coefficients[j - i])
                    .sum()
            })
            .collect();
        Self { coefficients }
    }

    pub fn derivative(&self) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * int(j as i64))
            .collect();
        Self { coefficients }
    }

    /// x-adic order of `self - other` over the common degrees, or
    /// `None` when they agree throughout.
    pub fn first_mismatch(&self, other: &Self) -> Option<usize> {
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .position(|(a, b)| a != b)
    }

    pub fn render(&self) -> String {
        let parts: Vec<String> = self.coefficients.iter().map(|c| c.to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

/// `x + sum_{n>=1} (-1)^(n+1) x^(n+1) / (n(n+1))` to degree `k`.
pub fn stirling_type_series(k: usize) -> FormalSeries {
    let coefficients = (0..=k)
        .map(|j| match j {
            0 => Rational::zero(),
            1 => int(1),
            j => {
                let n = j as i64 - 1;
                Rational::new(
                    BigInt::from(if n % 2 == 1 { 1 } else { -1 }),
                    BigInt::from(n * (n + 1)),
                )
            }
        })
        .collect();
    FormalSeries { coefficients }
}

/// Exact check of `(1+x) log(1+x) = x + sum (-1)^(n+1) x^(n+1)/(n(n+1))`
/// through degree `k`, of the vanishing constant term, and of
/// `((1+x) log(1+x))' = 1 + log(1+x)`. The series
/// `1 + sum (-1)^(n+1) x^n / (n(n+1))`, sometimes quoted for the derivative,
/// is compared too and only reported.
pub fn verify_log_series(k: usize) -> Result<AuditReport> {
    if k == 0 || k > LOG_SERIES_BOUND {
        return Err(Error::BoundExceeded {
            n: k,
            bound: LOG_SERIES_BOUND,
        });
    }
    let log = FormalSeries::log_one_plus(k);
    let mut one_plus_x = vec![Rational::zero(); k + 1];
    one_plus_x[0] = int(1);
    one_plus_x[1] = int(1);
    let lhs = FormalSeries {
        coefficients: one_plus_x,
    }
    .mul(&log);
    let rhs = stirling_type_series(k);
    let series_mismatch = lhs.first_mismatch(&rhs);
    let constant_ok = lhs.coefficients[0].is_zero();

    let derivative = lhs.derivative();
    let mut expected = log.clone();
    expected.coefficients[0] = int(1);
    expected.coefficients.truncate(k);
    let derivative_mismatch = derivative.first_mismatch(&expected);

    let quoted = FormalSeries {
        coefficients: (0..k)
            .map(|j| match j {
                0 => int(1),
                n => Rational::new(
                    BigInt::from(if n % 2 == 1 { 1 } else { -1 }),
                    BigInt::from(n as i64 * (n as i64 + 1)),
                ),
            })
            .collect(),
    };
    let quoted_mismatch = derivative.first_mismatch(&quoted);

    let order = series_mismatch.map(|d| d as i64).unwrap_or(k as i64 + 1);
    let pass = series_mismatch.is_none() && constant_ok && derivative_mismatch.is_none();
    let mut report = AuditReport::new("eq6").param("K", k);
    report.lhs = lhs.render();
    report.rhs = rhs.render();
    report.diff_valuation = Some(order);
    report.target = k as i64 + 1;
    report.verdict = Some(if pass { Verdict::Pass } else { Verdict::Fail });
    let mismatch_json = |m: Option<usize>| match m {
        Some(d) => serde_json::Value::from(d),
        None => serde_json::Value::Null,
    };
    Ok(report
        .detail("constant_term", lhs.coefficients[0].to_string())
        .detail("derivative_first_mismatch", mismatch_json(derivative_mismatch))
        .detail("quoted_derivative_first_mismatch", mismatch_json(quoted_mismatch))
        .detail(
            "quoted_derivative_coefficient_1",
            quoted.coefficients.get(1).map(|c| c.to_string()).unwrap_or_default(),
        ))
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
    fn classical_values() {
        let e: Vec<String> = (0..7).map(|n| classical_euler(n).unwrap().to_string()).collect();
        assert_eq!(e, ["1", "-1/2", "0", "1/4", "0", "-1/2", "0"]);
        let b: Vec<String> = (0..7).map(|n| classical_bernoulli(n).unwrap().to_string()).collect();
        assert_eq!(b, ["1", "-1/2", "1/6", "0", "-1/30", "0", "1/42"]);
        assert_eq!(
            classical_euler(65),
            Err(Error::BoundExceeded { n: 65, bound: 64 })
        );
    }

    #[test]
    fn low_order_q_euler() {
        let c = ctx(3, 30);
        let q = q_make(1, 2, c).unwrap();
        let one = PadicNumber::one(c);
        assert!(q_euler_number(0, &q).unwrap().agrees_with(&one));
        assert!(q_euler_polynomial(0, &rational(5, 1).unwrap(), &q, EulerVariant::Derived)
            .unwrap()
            .agrees_with(&one));
        // E_{1,q} = -q / (1 + q^2)
        let expected = (-q.value()).try_div(&(&one + &q.value().pow(2).unwrap())).unwrap();
        let e1 = q_euler_number(1, &q).unwrap();
        assert!(e1.agrees_with(&expected));
        assert_eq!(e1.absolute_precision(), 30);
    }

    #[test]
    fn log_series_coefficients() {
        let lhs = FormalSeries {
            coefficients: vec![int(1), int(1), int(0), int(0)],
        }
        .mul(&FormalSeries::log_one_plus(3));
        assert_eq!(lhs.render(), "[0,1,1/2,-1/6]");
        let r = verify_log_series(200).unwrap();
        assert_eq!(r.verdict, Some(Verdict::Pass));
        assert_eq!(r.diff_valuation, Some(201));
        assert_eq!(r.details["quoted_derivative_first_mismatch"], 1);
    }
}
