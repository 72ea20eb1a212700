//! q-deformation primitives for `q = 1 + t p^m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::audit::AuditReport;
use crate::error::{Error, Result};
use crate::padic::{exp_p, log_classical, PadicContext, PadicNumber};

/// A validated deformation parameter `q = 1 + t p^m` with `p ∤ t`, `m >= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QParam {
    t: i64,
    depth: u32,
    value: PadicNumber,
    log_q: PadicNumber,
}

pub fn q_make(t: i64, m: i64, ctx: PadicContext) -> Result<QParam> {
    if m < 1 {
        return Err(Error::DepthTooSmall(m));
    }
    let p = ctx.prime() as i64;
    if t % p == 0 {
        return Err(Error::UnitPartDivisible(t));
    }
    if m >= ctx.precision() as i64 {
        return Err(Error::DepthExceedsPrecision {
            depth: m,
            precision: ctx.precision(),
        });
    }
    let step = PadicNumber::from_i64(t, ctx).shift(m);
    let value = &PadicNumber::one(ctx) + &step;
    let log_q = log_classical(&value)?;
    Ok(QParam {
        t,
        depth: m as u32,
        value,
        log_q,
    })
}

impl QParam {
    pub fn context(&self) -> PadicContext {
        self.value.context()
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    /// `m = v_p(q - 1)`.
    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn value(&self) -> &PadicNumber {
        &self.value
    }

    pub fn log_q(&self) -> &PadicNumber {
        &self.log_q
    }

    /// The same `q` rebuilt in a context of different precision.
    pub fn at_precision(&self, precision: u32) -> Result<QParam> {
        q_make(
            self.t,
            self.depth as i64,
            self.context().with_precision(precision),
        )
    }

    /// `"t,m"` as accepted on the command line.
    pub fn spec(&self) -> String {
        format!("{},{}", self.t, self.depth)
    }
}

/// `q^x = exp(x log q)`, defined when `v_p(x) + m >= 1`.
pub fn q_pow(q: &QParam, x: &PadicNumber) -> Result<PadicNumber> {
    if x.context() != q.context() {
        return Err(Error::ContextMismatch);
    }
    if !x.is_zero() {
        let v = x.valuation()?;
        if v + (q.depth as i64) < 1 {
            return Err(Error::ExponentOutOfDomain {
                valuation: v,
                depth: q.depth,
            });
        }
    }
    let arg = x * &q.log_q;
    if arg.order() < 1 {
        // zero exponent known too coarsely to place it in the domain
        return Err(Error::ExponentOutOfDomain {
            valuation: x.order(),
            depth: q.depth,
        });
    }
    exp_p(&arg)
}

/// `q^x` for an exact rational exponent.
pub fn q_pow_rational(q: &QParam, x: &BigRational) -> Result<PadicNumber> {
    q_pow(q, &PadicNumber::from_bigrational(x, q.context()))
}

/// Exact integer power `q^n`.
pub fn q_pow_int(q: &QParam, n: i64) -> PadicNumber {
    q.value.pow(n).expect("q is a unit")
}

/// `[x]_q = (1 - q^x) / (1 - q)`.
pub fn q_bracket(x: &PadicNumber, q: &QParam) -> Result<PadicNumber> {
    let one = PadicNumber::one(q.context());
    (&one - &q_pow(q, x)?).try_div(&(&one - &q.value))
}

pub fn q_bracket_rational(x: &BigRational, q: &QParam) -> Result<PadicNumber> {
    if x.is_zero() {
        return Ok(PadicNumber::zero(q.context()));
    }
    q_bracket(&PadicNumber::from_bigrational(x, q.context()), q)
}

/// `[n]_q` from the exact power `q^n`.
pub fn q_bracket_int(n: i64, q: &QParam) -> PadicNumber {
    let one = PadicNumber::one(q.context());
    (&one - &q_pow_int(q, n))
        .try_div(&(&one - &q.value))
        .expect("q != 1")
}

/// `[n]_{-q} = (1 - (-q)^n) / (1 + q)`.
pub fn q_bracket_neg(n: u64, q: &QParam) -> PadicNumber {
    let one = PadicNumber::one(q.context());
    let mut power = q_pow_int(q, n as i64);
    if n % 2 == 1 {
        power = -power;
    }
    (&one - &power)
        .try_div(&(&one + &q.value))
        .expect("1 + q is a unit for odd p")
}

/// `[x + z]_q = [x]_q + q^x [z]_q`.
pub fn verify_cocycle(
    x: &BigRational,
    z: &BigRational,
    q: &QParam,
    target: i64,
) -> Result<AuditReport> {
    let lhs = q_bracket_rational(&(x + z), q)?;
    let rhs = &q_bracket_rational(x, q)? + &(&q_pow_rational(q, x)? * &q_bracket_rational(z, q)?);
    Ok(crate::euler::params(AuditReport::new("eq9"), q)
        .param("x", x)
        .param("z", z)
        .compare(&lhs, &rhs, target, false))
}

/// `x` as an exact rational, for exponents supplied as `a/b`.
pub fn rational(a: i64, b: i64) -> Result<BigRational> {
    if b == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(BigRational::new(BigInt::from(a), BigInt::from(b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: i64, n: i64) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn construction() {
        let c = ctx(3, 30);
        let q = q_make(1, 2, c).unwrap();
        assert_eq!(q.value(), &PadicNumber::from_i64(10, c));
        assert_eq!(q.depth(), 2);
        assert_eq!(q.log_q().valuation().unwrap(), 2);
        assert_eq!(q_make(3, 1, c), Err(Error::UnitPartDivisible(3)));
        assert_eq!(q_make(1, 0, ctx(5, 30)), Err(Error::DepthTooSmall(0)));
        assert!(matches!(
            q_make(1, 30, c),
            Err(Error::DepthExceedsPrecision { .. })
        ));
    }

    #[test]
    fn powers() {
        let c = ctx(3, 30);
        let q = q_make(1, 2, c).unwrap();
        let one = PadicNumber::one(c);
        assert!(q_pow(&q, &PadicNumber::zero(c)).unwrap().agrees_with(&one));
        assert!(q_pow(&q, &one).unwrap().agrees_with(q.value()));
        let cube_root = q_pow_rational(&q, &rational(1, 3).unwrap()).unwrap();
        assert!(cube_root.pow(3).unwrap().agrees_with(q.value()));
        assert_eq!(
            q_pow_rational(&q, &rational(1, 9).unwrap()),
            Err(Error::ExponentOutOfDomain {
                valuation: -2,
                depth: 2
            })
        );
        for n in [-7i64, -1, 2, 5, 81, 1000] {
            let via_exp = q_pow(&q, &PadicNumber::from_i64(n, c)).unwrap();
            assert!(via_exp.agrees_with(&q_pow_int(&q, n)), "n = {n}");
        }
    }

    #[test]
    fn brackets() {
        let c = ctx(5, 25);
        let q = q_make(2, 1, c).unwrap();
        let one = PadicNumber::one(c);
        assert!(q_bracket(&PadicNumber::zero(c), &q).unwrap().is_zero());
        let two = q_bracket(&PadicNumber::from_i64(2, c), &q).unwrap();
        assert!(two.agrees_with(&(&one + q.value())));
        assert_eq!(q_bracket_neg(1, &q), one);
        assert_eq!(q_bracket_neg(2, &q), &one - q.value());
        // [p^N]_{-q} is a unit
        assert_eq!(q_bracket_neg(125, &q).valuation().unwrap(), 0);
    }

    #[test]
    fn bracket_valuation_matches_argument() {
        let c = ctx(3, 30);
        let q = q_make(1, 2, c).unwrap();
        let x = q_bracket_rational(&rational(1, 3).unwrap(), &q).unwrap();
        assert_eq!(x.valuation().unwrap(), -1);
        let y = q_bracket_rational(&rational(18, 1).unwrap(), &q).unwrap();
        assert_eq!(y.valuation().unwrap(), 2);
    }
}
