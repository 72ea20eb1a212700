//! Fixed-precision arithmetic in `Q_p` for odd primes.
//!
//! A nonzero [`PadicNumber`] is `p^v * u + O(p^(v + k))` with `u` a unit known
//! modulo `p^k`. Precision propagates worst-case: products and quotients keep
//! the smaller relative precision, sums keep the smaller absolute precision.
//! Zero carries only a bound `O(p^M)`.

mod analytic;
mod residue;
mod text;

pub use analytic::{
    exp_p, iwasawa_decompose, log_classical, log_iwasawa, teichmuller, IwasawaParts, LogSeries,
};
pub use text::{parse, render, PadicJson};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use residue::{strip_p, Modulus, Residue};

/// Largest supported working precision (digits).
pub const MAX_PRECISION: u32 = 100_000;

/// The ambient odd prime and the working precision in base-`p` digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PadicContext {
    prime: u32,
    precision: u32,
}

impl PadicContext {
    pub fn new(p: i64, precision: i64) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenPrime);
        }
        if p > u32::MAX as i64 {
            return Err(Error::PrimeTooLarge(p));
        }
        if p < 2 || !is_prime(p as u64) {
            return Err(Error::NonPrime(p));
        }
        if precision < 1 || precision > MAX_PRECISION as i64 {
            return Err(Error::BadPrecision(precision));
        }
        Ok(Self {
            prime: p as u32,
            precision: precision as u32,
        })
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// Same prime, different working precision.
    pub fn with_precision(&self, precision: u32) -> Self {
        Self {
            prime: self.prime,
            precision: precision.clamp(1, MAX_PRECISION),
        }
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// `v_p(n)` for a nonzero integer.
pub fn valuation_of_int(n: &BigInt, p: u32) -> u32 {
    debug_assert!(!n.is_zero());
    let mut n = n.abs();
    let p = BigInt::from(p);
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// `v_p(n)` for a nonzero machine integer.
pub fn valuation_of_i64(n: i64, p: u32) -> u32 {
    debug_assert!(n != 0);
    let mut n = n.unsigned_abs();
    let p = p as u64;
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Zero {
        bound: i64,
    },
    Unit {
        valuation: i64,
        digits: u32,
        mantissa: Residue,
    },
}

/// An element of `Q_p` known to finite precision.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PadicNumber {
    ctx: PadicContext,
    repr: Repr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// `a op b` with context and zero-divisor checks.
pub fn arith(a: &PadicNumber, b: &PadicNumber, op: ArithOp) -> Result<PadicNumber> {
    match op {
        ArithOp::Add => a.try_add(b),
        ArithOp::Sub => a.try_sub(b),
        ArithOp::Mul => a.try_mul(b),
        ArithOp::Div => a.try_div(b),
    }
}

impl PadicNumber {
    /// Zero known to the context's absolute precision.
    pub fn zero(ctx: PadicContext) -> Self {
        Self::zero_with_bound(ctx, ctx.precision as i64)
    }

    /// `O(p^bound)`.
    pub fn zero_with_bound(ctx: PadicContext, bound: i64) -> Self {
        Self {
            ctx,
            repr: Repr::Zero { bound },
        }
    }

    pub fn one(ctx: PadicContext) -> Self {
        Self::from_i64(1, ctx)
    }

    pub fn from_i64(n: i64, ctx: PadicContext) -> Self {
        if n == 0 {
            return Self::zero(ctx);
        }
        let p = ctx.prime;
        let v = valuation_of_i64(n, p);
        let unit = n / (p as i64).pow(v);
        let modulus = Modulus::new(p, ctx.precision);
        let abs = modulus.reduce_u64(unit.unsigned_abs());
        let mantissa = if unit < 0 { modulus.neg(&abs) } else { abs };
        Self::unit_raw(ctx, v as i64, ctx.precision, mantissa)
    }

    pub fn from_bigint(n: &BigInt, ctx: PadicContext) -> Self {
        if n.is_zero() {
            return Self::zero(ctx);
        }
        let p = ctx.prime;
        let v = valuation_of_int(n, p);
        let unit = n / BigInt::from(p).pow(v);
        let modulus = Modulus::new(p, ctx.precision);
        let m = BigInt::from_biguint(Sign::Plus, modulus.value());
        let reduced = unit.mod_floor(&m).to_biguint().unwrap_or_default();
        Self::unit_raw(ctx, v as i64, ctx.precision, modulus.reduce_big(&reduced))
    }

    /// The image of `a / b` in `Q_p`.
    pub fn from_rational(a: i64, b: i64, ctx: PadicContext) -> Result<Self> {
        if b == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::from_bigrational(
            &BigRational::new(BigInt::from(a), BigInt::from(b)),
            ctx,
        ))
    }

    pub fn from_bigrational(r: &BigRational, ctx: PadicContext) -> Self {
        let num = Self::from_bigint(r.numer(), ctx);
        let den = Self::from_bigint(r.denom(), ctx);
        num.try_div(&den).expect("reduced rational has a nonzero denominator")
    }

    /// `p^valuation * mantissa + O(p^(valuation + digits))`; the mantissa must
    /// be prime to `p`.
    pub fn from_parts(
        ctx: PadicContext,
        valuation: i64,
        mantissa: &BigUint,
        digits: u32,
    ) -> Result<Self> {
        if digits == 0 || digits > ctx.precision {
            return Err(Error::ContextMismatch);
        }
        if (mantissa % ctx.prime).is_zero() {
            return Err(Error::NotAUnit);
        }
        let modulus = Modulus::new(ctx.prime, digits);
        Ok(Self::unit_raw(
            ctx,
            valuation,
            digits,
            modulus.reduce_big(mantissa),
        ))
    }

    /// `p^e` to full precision.
    pub fn prime_power(e: i64, ctx: PadicContext) -> Self {
        let modulus = Modulus::new(ctx.prime, ctx.precision);
        Self::unit_raw(ctx, e, ctx.precision, modulus.one())
    }

    fn unit_raw(ctx: PadicContext, valuation: i64, digits: u32, mantissa: Residue) -> Self {
        debug_assert!(digits >= 1 && digits <= ctx.precision);
        Self {
            ctx,
            repr: Repr::Unit {
                valuation,
                digits,
                mantissa,
            },
        }
    }

    pub fn context(&self) -> PadicContext {
        self.ctx
    }

    pub fn prime(&self) -> u32 {
        self.ctx.prime
    }

    /// True when no significant digit is known (the value is `O(p^M)`).
    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    pub fn valuation(&self) -> Result<i64> {
        match self.repr {
            Repr::Zero { .. } => Err(Error::ZeroHasNoValuation),
            Repr::Unit { valuation, .. } => Ok(valuation),
        }
    }

    /// Valuation for nonzero values, the precision bound for zero: in both
    /// cases a lower bound for the true valuation.
    pub fn order(&self) -> i64 {
        match self.repr {
            Repr::Zero { bound } => bound,
            Repr::Unit { valuation, .. } => valuation,
        }
    }

    /// `M` such that the value is known modulo `p^M`.
    pub fn absolute_precision(&self) -> i64 {
        match self.repr {
            Repr::Zero { bound } => bound,
            Repr::Unit {
                valuation, digits, ..
            } => valuation + digits as i64,
        }
    }

    /// Number of known significant digits (0 for zero).
    pub fn relative_precision(&self) -> u32 {
        match self.repr {
            Repr::Zero { .. } => 0,
            Repr::Unit { digits, .. } => digits,
        }
    }

    pub fn unit_part(&self) -> Result<Self> {
        match &self.repr {
            Repr::Zero { .. } => Err(Error::ZeroHasNoValuation),
            Repr::Unit {
                digits, mantissa, ..
            } => Ok(Self::unit_raw(self.ctx, 0, *digits, mantissa.clone())),
        }
    }

    /// The unit mantissa as an integer in `[0, p^k)`.
    pub fn mantissa(&self) -> Option<BigUint> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { mantissa, .. } => Some(mantissa.to_biguint()),
        }
    }

    /// Little-endian base-`p` digits of the mantissa.
    pub fn digits(&self) -> Vec<u32> {
        match &self.repr {
            Repr::Zero { .. } => Vec::new(),
            Repr::Unit {
                digits, mantissa, ..
            } => mantissa.digits(self.ctx.prime, *digits),
        }
    }

    /// Residue of the mantissa modulo `p`; `None` for zero.
    pub fn leading_digit(&self) -> Option<u32> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { mantissa, .. } => Some(mantissa.rem_small(self.ctx.prime)),
        }
    }

    /// Moves the value into another context over the same prime, capping the
    /// relative precision at the new working precision.
    pub fn to_context(&self, ctx: PadicContext) -> Result<Self> {
        if ctx.prime != self.ctx.prime {
            return Err(Error::ContextMismatch);
        }
        Ok(match &self.repr {
            Repr::Zero { bound } => Self::zero_with_bound(ctx, *bound),
            Repr::Unit {
                valuation,
                digits,
                mantissa,
            } => {
                let k = (*digits).min(ctx.precision);
                let modulus = Modulus::new(ctx.prime, k);
                Self::unit_raw(ctx, *valuation, k, modulus.reduce(mantissa))
            }
        })
    }

    /// Forgets every digit at or beyond `p^bound`.
    pub fn truncate_absolute(&self, bound: i64) -> Self {
        match &self.repr {
            Repr::Zero { bound: b } => Self::zero_with_bound(self.ctx, (*b).min(bound)),
            Repr::Unit {
                valuation,
                digits,
                mantissa,
            } => {
                if *valuation >= bound {
                    return Self::zero_with_bound(self.ctx, bound);
                }
                let k = ((bound - valuation) as u64).min(*digits as u64) as u32;
                if k == *digits {
                    return self.clone();
                }
                let modulus = Modulus::new(self.ctx.prime, k);
                Self::unit_raw(self.ctx, *valuation, k, modulus.reduce(mantissa))
            }
        }
    }

    /// Keeps at most `k` significant digits.
    pub fn truncate_relative(&self, k: u32) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { valuation, .. } => self.truncate_absolute(valuation + k as i64),
        }
    }

    fn check_ctx(&self, other: &Self) -> Result<()> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(self.add_unchecked(&other.neg_ref()))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check_ctx(other)?;
        let inv = other.inverse()?;
        Ok(self.mul_unchecked(&inv))
    }

    pub fn inverse(&self) -> Result<Self> {
        match &self.repr {
            Repr::Zero { .. } => Err(Error::DivisionByZero),
            Repr::Unit {
                valuation,
                digits,
                mantissa,
            } => {
                let modulus = Modulus::new(self.ctx.prime, *digits);
                let inv = modulus
                    .inv(mantissa)
                    .expect("normalized mantissa is a unit");
                Ok(Self::unit_raw(self.ctx, -valuation, *digits, inv))
            }
        }
    }

    /// Integer power; negative exponents invert first and `a^0` is an exact 1.
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e == 0 {
            return Ok(Self::one(self.ctx));
        }
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        match &self.repr {
            Repr::Zero { bound } => Ok(Self::zero_with_bound(self.ctx, bound.saturating_mul(e))),
            Repr::Unit {
                valuation,
                digits,
                mantissa,
            } => {
                let modulus = Modulus::new(self.ctx.prime, *digits);
                Ok(Self::unit_raw(
                    self.ctx,
                    valuation * e,
                    *digits,
                    modulus.pow(mantissa, e as u64),
                ))
            }
        }
    }

    /// Exact multiplication by `p^e`.
    pub fn shift(&self, e: i64) -> Self {
        match &self.repr {
            Repr::Zero { bound } => Self::zero_with_bound(self.ctx, bound + e),
            Repr::Unit {
                valuation,
                digits,
                mantissa,
            } => Self::unit_raw(self.ctx, valuation + e, *digits, mantissa.clone()),
        }
    }

    /// `order(self - other)`: how many leading digits the two values share.
    pub fn diff_valuation(&self, other: &Self) -> Result<i64> {
        Ok(self.try_sub(other)?.order())
    }

    /// Equal on every digit both operands claim.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.try_sub(other).map(|d| d.is_zero()).unwrap_or(false)
    }

    /// True for `a = 1 + O(p)` with at least one known digit of `a - 1`.
    pub fn is_one_unit(&self) -> bool {
        match &self.repr {
            Repr::Unit { valuation: 0, .. } => self.leading_digit() == Some(1),
            _ => false,
        }
    }

    /// Best-effort conversion to a rational for small exact values; used for
    /// display of integers only.
    pub fn to_i64_if_small(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => Some(0),
            Repr::Unit {
                valuation,
                mantissa,
                digits,
            } if *valuation >= 0 => {
                let m = mantissa.to_biguint();
                let modulus = Modulus::new(self.ctx.prime, *digits).value();
                let half = &modulus >> 1;
                let signed = if m > half {
                    -(BigInt::from(modulus) - BigInt::from(m))
                } else {
                    BigInt::from(m)
                };
                let scale = BigInt::from(self.ctx.prime).pow(*valuation as u32);
                (signed * scale).to_i64()
            }
            _ => None,
        }
    }

    fn neg_ref(&self) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit {
                valuation,
                digits,
                mantissa,
            } => {
                let modulus = Modulus::new(self.ctx.prime, *digits);
                Self::unit_raw(self.ctx, *valuation, *digits, modulus.neg(mantissa))
            }
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Zero { bound: a }, Repr::Zero { bound: b }) => {
                Self::zero_with_bound(self.ctx, a + b)
            }
            (Repr::Zero { bound }, Repr::Unit { valuation, .. })
            | (Repr::Unit { valuation, .. }, Repr::Zero { bound }) => {
                Self::zero_with_bound(self.ctx, bound + valuation)
            }
            (
                Repr::Unit {
                    valuation: va,
                    digits: ka,
                    mantissa: ua,
                },
                Repr::Unit {
                    valuation: vb,
                    digits: kb,
                    mantissa: ub,
                },
            ) => {
                let k = (*ka).min(*kb);
                let modulus = Modulus::new(self.ctx.prime, k);
                Self::unit_raw(self.ctx, va + vb, k, modulus.mul(ua, ub))
            }
        }
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let abs = self.absolute_precision().min(other.absolute_precision());
        match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, Repr::Zero { .. }) => Self::zero_with_bound(self.ctx, abs),
            (Repr::Zero { .. }, Repr::Unit { .. }) => other.truncate_absolute(abs),
            (Repr::Unit { .. }, Repr::Zero { .. }) => self.truncate_absolute(abs),
            (
                Repr::Unit {
                    valuation: va,
                    mantissa: ua,
                    ..
                },
                Repr::Unit {
                    valuation: vb,
                    mantissa: ub,
                    ..
                },
            ) => {
                let v = (*va).min(*vb);
                if v >= abs {
                    return Self::zero_with_bound(self.ctx, abs);
                }
                let width = (abs - v) as u32;
                let modulus = Modulus::new(self.ctx.prime, width);
                let sum = if va <= vb {
                    modulus.shifted_add(ub, (vb - va) as u32, ua)
                } else {
                    modulus.shifted_add(ua, (va - vb) as u32, ub)
                };
                if sum.is_zero() {
                    return Self::zero_with_bound(self.ctx, abs);
                }
                let (w, unit) = strip_p(&sum, self.ctx.prime, width);
                Self::unit_raw(self.ctx, v + w as i64, width - w, unit)
            }
        }
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&PadicNumber> for &PadicNumber {
            type Output = PadicNumber;
            fn $method(self, rhs: &PadicNumber) -> PadicNumber {
                self.$inner(rhs)
                    .expect("p-adic operands from different contexts")
            }
        }
        impl $trait<PadicNumber> for PadicNumber {
            type Output = PadicNumber;
            fn $method(self, rhs: PadicNumber) -> PadicNumber {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&PadicNumber> for PadicNumber {
            type Output = PadicNumber;
            fn $method(self, rhs: &PadicNumber) -> PadicNumber {
                (&self).$method(rhs)
            }
        }
        impl $trait<PadicNumber> for &PadicNumber {
            type Output = PadicNumber;
            fn $method(self, rhs: PadicNumber) -> PadicNumber {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        self.neg_ref()
    }
}

impl Neg for PadicNumber {
    type Output = PadicNumber;
    fn neg(self) -> PadicNumber {
        self.neg_ref()
    }
}

/// Sum of a nonempty sequence; starting from the first term avoids capping
/// the result at the precision of an artificial zero.
pub fn sum<'a, I>(terms: I, ctx: PadicContext) -> PadicNumber
where
    I: IntoIterator<Item = &'a PadicNumber>,
{
    let mut iter = terms.into_iter();
    match iter.next() {
        None => PadicNumber::zero(ctx),
        Some(first) => iter.fold(first.clone(), |acc, t| &acc + t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: i64, n: i64) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn context_validation() {
        let c = ctx(3, 30);
        assert_eq!((c.prime(), c.precision()), (3, 30));
        assert_eq!(PadicContext::new(2, 10), Err(Error::EvenPrime));
        assert_eq!(PadicContext::new(9, 10), Err(Error::NonPrime(9)));
        assert_eq!(PadicContext::new(1, 10), Err(Error::NonPrime(1)));
        assert_eq!(PadicContext::new(5, 0), Err(Error::BadPrecision(0)));
    }

    #[test]
    fn rational_embedding() {
        let x = PadicNumber::from_rational(1, 3, ctx(3, 30)).unwrap();
        assert_eq!(x.valuation().unwrap(), -1);
        assert_eq!(x.mantissa().unwrap(), BigUint::from(1u32));

        let seven = PadicNumber::from_rational(7, 1, ctx(5, 3)).unwrap();
        assert_eq!(seven.valuation().unwrap(), 0);
        assert_eq!(seven.digits(), vec![2, 1, 0]);

        // 5 * 2 = 10 = 1 mod 9
        let fifth = PadicNumber::from_rational(1, 5, ctx(3, 2)).unwrap();
        assert_eq!(fifth.valuation().unwrap(), 0);
        assert_eq!(fifth.mantissa().unwrap(), BigUint::from(2u32));

        assert_eq!(
            PadicNumber::from_rational(1, 0, ctx(3, 2)),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn basic_arithmetic() {
        let c = ctx(3, 20);
        let third = PadicNumber::from_rational(1, 3, c).unwrap();
        let two_thirds = PadicNumber::from_rational(2, 3, c).unwrap();
        let one = PadicNumber::one(c);
        assert!((&third + &two_thirds).agrees_with(&one));
        let three = PadicNumber::from_i64(3, c);
        assert_eq!(&three * &third, one);
        assert_eq!(
            arith(&one, &PadicNumber::zero(c), ArithOp::Div),
            Err(Error::DivisionByZero)
        );
        let other = PadicNumber::one(ctx(5, 20));
        assert_eq!(one.try_add(&other), Err(Error::ContextMismatch));
    }

    #[test]
    fn valuation_and_unit_part() {
        let c = ctx(3, 10);
        let x = PadicNumber::from_i64(45, c);
        assert_eq!(x.valuation().unwrap(), 2);
        assert_eq!(x.unit_part().unwrap(), PadicNumber::from_i64(5, c));
        assert_eq!(
            PadicNumber::zero(c).valuation(),
            Err(Error::ZeroHasNoValuation)
        );
    }

    #[test]
    fn cancellation_loses_absolute_precision_only() {
        let c = ctx(5, 10);
        let a = PadicNumber::from_i64(1 + 5i64.pow(4), c);
        let b = PadicNumber::one(c);
        let d = &a - &b;
        assert_eq!(d.valuation().unwrap(), 4);
        // a and b both known mod 5^10
        assert_eq!(d.absolute_precision(), 10);
        assert_eq!(d.relative_precision(), 6);
        let z = &b - &b;
        assert!(z.is_zero());
        assert_eq!(z.order(), 10);
    }

    #[test]
    fn negative_integers() {
        let c = ctx(7, 8);
        let m = PadicNumber::from_i64(-1, c);
        assert_eq!(m.digits(), vec![6; 8]);
        assert_eq!(m.to_i64_if_small(), Some(-1));
        assert!((&m + &PadicNumber::one(c)).is_zero());
    }

    #[test]
    fn big_path_matches_word_path() {
        // precision 60 at p = 7 needs more than 64 bits
        let wide = ctx(7, 60);
        let narrow = ctx(7, 20);
        let a = PadicNumber::from_rational(123_456, 789, wide).unwrap();
        let b = PadicNumber::from_rational(-98_765, 4_321, wide).unwrap();
        let prod_wide = (&a * &b).to_context(narrow).unwrap();
        let prod_narrow =
            &a.to_context(narrow).unwrap() * &b.to_context(narrow).unwrap();
        assert_eq!(prod_wide, prod_narrow);
        let q_wide = a.try_div(&b).unwrap().to_context(narrow).unwrap();
        let q_narrow = a
            .to_context(narrow)
            .unwrap()
            .try_div(&b.to_context(narrow).unwrap())
            .unwrap();
        assert_eq!(q_wide, q_narrow);
    }
}
