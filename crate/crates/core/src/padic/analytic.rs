//! Teichmüller lifts, the p-adic exponential, and the classical and Iwasawa
//! logarithms.

use super::{PadicContext, PadicNumber};
use crate::error::{Error, Result};

/// `omega(a)`: the `(p-1)`-th root of unity congruent to the unit `a` mod `p`,
/// obtained by iterating `x -> x^p` until it is fixed.
pub fn teichmuller(a: &PadicNumber) -> Result<PadicNumber> {
    let ctx = a.context();
    match a.valuation() {
        Ok(0) => {}
        _ => return Err(Error::NotAUnit),
    }
    let residue = a.leading_digit().ok_or(Error::NotAUnit)?;
    let mut x = PadicNumber::from_i64(residue as i64, ctx);
    let p = ctx.prime() as i64;
    for _ in 0..=ctx.precision() {
        let next = x.pow(p)?;
        if next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// `exp(a) = sum a^k / k!` for `v_p(a) >= 1`.
pub fn exp_p(a: &PadicNumber) -> Result<PadicNumber> {
    let ctx = a.context();
    let n = ctx.precision() as i64;
    let one = PadicNumber::one(ctx);
    if a.is_zero() {
        let bound = a.order();
        if bound < 1 {
            return Err(Error::OutsideConvergenceDomain(bound));
        }
        return Ok(one.truncate_absolute(bound.min(n)));
    }
    let v = a.valuation()?;
    if v < 1 {
        return Err(Error::OutsideConvergenceDomain(v));
    }
    let target = a.absolute_precision().min(n);
    let p = ctx.prime() as i64;
    let mut total = one.clone();
    let mut term = one;
    let mut k = 1i64;
    // v_p(a^k / k!) >= k v - (k - 1)/(p - 1), increasing in k
    while (k * v - target) * (p - 1) < k - 1 {
        term = (&term * a).try_div(&PadicNumber::from_i64(k, ctx))?;
        total = &total + &term;
        k += 1;
    }
    Ok(total.truncate_absolute(target))
}

/// `log(a) = sum (-1)^(k+1) (a-1)^k / k` for a 1-unit `a`.
pub fn log_classical(a: &PadicNumber) -> Result<PadicNumber> {
    let ctx = a.context();
    if !a.is_one_unit() {
        return Err(Error::NotAOneUnit);
    }
    let t = a - &PadicNumber::one(ctx);
    let target = a.absolute_precision();
    if t.is_zero() {
        return Ok(PadicNumber::zero_with_bound(ctx, target));
    }
    let w = t.valuation()?;
    let p = ctx.prime() as i64;
    let mut total = t.clone();
    let mut power = t.clone();
    let mut k = 2i64;
    while !log_tail_negligible(k, w, target, p) {
        power = &power * &t;
        let term = power.try_div(&PadicNumber::from_i64(k, ctx))?;
        total = if k % 2 == 0 {
            &total - &term
        } else {
            &total + &term
        };
        k += 1;
    }
    Ok(total.truncate_absolute(target))
}

/// Every term `t^j / j` with `j >= k` has valuation `>= target`, given
/// `v_p(t) = w >= 1`.
fn log_tail_negligible(k: i64, w: i64, target: i64, p: i64) -> bool {
    k * w - floor_log(k, p) >= target
}

fn floor_log(k: i64, p: i64) -> i64 {
    let mut e = 0;
    let mut acc = p;
    while acc <= k {
        acc *= p;
        e += 1;
    }
    e
}

/// `a = p^v * omega(u) * <u>` with `<u>` a 1-unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IwasawaParts {
    pub valuation: i64,
    pub root_of_unity: PadicNumber,
    pub principal_unit: PadicNumber,
}

pub fn iwasawa_decompose(a: &PadicNumber) -> Result<IwasawaParts> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let valuation = a.valuation()?;
    let unit = a.unit_part()?;
    let root_of_unity = teichmuller(&unit)?;
    let principal_unit = unit.try_div(&root_of_unity)?;
    Ok(IwasawaParts {
        valuation,
        root_of_unity,
        principal_unit,
    })
}

/// The Iwasawa branch: `log p = 0`, zero on roots of unity, additive on all
/// of `Q_p^*`. Computed as `log(u^(p-1)) / (p-1)` for the unit part `u`, which
/// equals `log <u>` because `omega(u)^(p-1) = 1`.
pub fn log_iwasawa(a: &PadicNumber) -> Result<PadicNumber> {
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let ctx = a.context();
    let p = ctx.prime() as i64;
    let unit = a.unit_part()?;
    let principal = unit.pow(p - 1)?;
    log_classical(&principal)?.try_div(&PadicNumber::from_i64(p - 1, ctx))
}

/// Precomputed coefficients `(-1)^(k+1)/k` for repeated logarithms in one
/// context; evaluation is Horner's rule on `a - 1`.
#[derive(Clone, Debug)]
pub struct LogSeries {
    ctx: PadicContext,
    coefficients: Vec<PadicNumber>,
    inverse_p_minus_one: PadicNumber,
}

impl LogSeries {
    pub fn new(ctx: PadicContext) -> Self {
        let p = ctx.prime() as i64;
        let target = ctx.precision() as i64;
        let mut coefficients = vec![PadicNumber::zero(ctx)];
        let mut k = 1i64;
        while !log_tail_negligible(k, 1, target, p) {
            let c = PadicNumber::from_rational(if k % 2 == 1 { 1 } else { -1 }, k, ctx)
                .expect("nonzero denominator");
            coefficients.push(c);
            k += 1;
        }
        let inverse_p_minus_one = PadicNumber::from_rational(1, p - 1, ctx).expect("p > 1");
        Self {
            ctx,
            coefficients,
            inverse_p_minus_one,
        }
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn log_one_unit(&self, a: &PadicNumber) -> Result<PadicNumber> {
        if a.context() != self.ctx {
            return Err(Error::ContextMismatch);
        }
        if !a.is_one_unit() {
            return Err(Error::NotAOneUnit);
        }
        let t = a - &PadicNumber::one(self.ctx);
        let target = a.absolute_precision();
        if t.is_zero() {
            return Ok(PadicNumber::zero_with_bound(self.ctx, target));
        }
        let w = t.valuation()?;
        let p = self.ctx.prime() as i64;
        let mut terms = 1usize;
        while !log_tail_negligible(terms as i64 + 1, w, target, p) {
            terms += 1;
        }
        let terms = terms.min(self.coefficients.len() - 1);
        let mut acc = self.coefficients[terms].clone();
        for c in self.coefficients[1..terms].iter().rev() {
            acc = &(&acc * &t) + c;
        }
        Ok((&acc * &t).truncate_absolute(target))
    }

    pub fn log_iwasawa(&self, a: &PadicNumber) -> Result<PadicNumber> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let p = self.ctx.prime() as i64;
        let principal = a.unit_part()?.pow(p - 1)?;
        Ok(&self.log_one_unit(&principal)? * &self.inverse_p_minus_one)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: i64, n: i64) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn teichmuller_examples() {
        let c = ctx(5, 20);
        let one = PadicNumber::one(ctx(3, 20));
        assert_eq!(teichmuller(&one).unwrap(), one);

        let w = teichmuller(&PadicNumber::from_i64(2, c)).unwrap();
        assert_eq!(w.pow(4).unwrap(), PadicNumber::one(c));
        assert_eq!(w.leading_digit(), Some(2));
        // independent check: iterate a -> a^5 by hand
        let mut x = PadicNumber::from_i64(2, c);
        for _ in 0..25 {
            x = x.pow(5).unwrap();
        }
        assert_eq!(w, x);

        assert_eq!(
            teichmuller(&PadicNumber::from_i64(5, c)),
            Err(Error::NotAUnit)
        );
    }

    #[test]
    fn exp_examples() {
        let c = ctx(3, 25);
        let one = PadicNumber::one(c);
        assert!(exp_p(&PadicNumber::zero(c)).unwrap().agrees_with(&one));
        let p = PadicNumber::from_i64(3, c);
        let prod = &exp_p(&p).unwrap() * &exp_p(&-&p).unwrap();
        assert!(prod.agrees_with(&one));
        assert_eq!(prod.absolute_precision(), 25);
        assert_eq!(exp_p(&one), Err(Error::OutsideConvergenceDomain(0)));
    }

    #[test]
    fn exp_matches_direct_rational_sum() {
        // exp(p) at p = 5 against the rational partial sum of p^k/k! embedded once
        use num_bigint::BigInt;
        use num_rational::BigRational;
        let c = ctx(5, 20);
        let mut sum = BigRational::from_integer(BigInt::from(0));
        let mut term = BigRational::from_integer(BigInt::from(1));
        for k in 0..40 {
            if k > 0 {
                term *= BigRational::new(BigInt::from(5), BigInt::from(k));
            }
            sum += &term;
        }
        let expected = PadicNumber::from_bigrational(&sum, c);
        let got = exp_p(&PadicNumber::from_i64(5, c)).unwrap();
        assert!(got.agrees_with(&expected));
        assert_eq!(got.absolute_precision(), 20);
    }

    #[test]
    fn log_examples() {
        let c = ctx(3, 25);
        let one = PadicNumber::one(c);
        assert!(log_classical(&one).unwrap().is_zero());
        let p = PadicNumber::from_i64(3, c);
        let back = log_classical(&exp_p(&p).unwrap()).unwrap();
        assert!(back.agrees_with(&p));
        assert_eq!(log_classical(&p), Err(Error::NotAOneUnit));
    }

    #[test]
    fn horner_log_matches_direct_series() {
        for &pr in &[3i64, 5, 7] {
            let c = ctx(pr, 30);
            let series = LogSeries::new(c);
            for n in [1i64, 2, 5, 11] {
                let a = PadicNumber::from_i64(1 + n * pr, c);
                let direct = log_classical(&a).unwrap();
                let horner = series.log_one_unit(&a).unwrap();
                assert_eq!(direct, horner, "p = {pr}, a = {}", 1 + n * pr);
            }
        }
    }

    #[test]
    fn iwasawa_branch() {
        let c = ctx(5, 20);
        assert!(log_iwasawa(&PadicNumber::from_i64(5, c)).unwrap().is_zero());
        let w = teichmuller(&PadicNumber::from_i64(3, c)).unwrap();
        assert!(log_iwasawa(&w).unwrap().is_zero());
        // p^2 * u against the explicit decomposition
        let u = PadicNumber::from_rational(17, 3, c).unwrap();
        let a = &u * &PadicNumber::from_i64(25, c);
        let parts = iwasawa_decompose(&u).unwrap();
        let expected = log_classical(&parts.principal_unit).unwrap();
        assert!(log_iwasawa(&a).unwrap().agrees_with(&expected));
        assert_eq!(log_iwasawa(&PadicNumber::zero(c)), Err(Error::ZeroArgument));
        let series = LogSeries::new(c);
        assert!(series.log_iwasawa(&a).unwrap().agrees_with(&expected));
    }
}
