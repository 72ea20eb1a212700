//! Text and JSON forms of p-adic numbers.
//!
//! Text: `p^v * [d0,d1,...,d(k-1)] + O(p^(v+k))` with little-endian base-`p`
//! digits and `d0 != 0`; zero prints as `0 + O(p^M)`.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{PadicContext, PadicNumber};
use crate::error::{Error, Result};

pub fn render(a: &PadicNumber) -> String {
    let p = a.prime();
    match a.valuation() {
        Err(_) => format!("0 + O({p}^{})", a.order()),
        Ok(v) => {
            let digits: Vec<String> = a.digits().iter().map(u32::to_string).collect();
            format!(
                "{p}^{v} * [{}] + O({p}^{})",
                digits.join(","),
                a.absolute_precision()
            )
        }
    }
}

pub fn parse(text: &str, ctx: PadicContext) -> Result<PadicNumber> {
    let syntax = |msg: &str| Error::Syntax(format!("{msg} in {text:?}"));
    let (head, tail) = text
        .rsplit_once('+')
        .ok_or_else(|| syntax("missing `+ O(...)` term"))?;
    let bound_text = tail
        .trim()
        .strip_prefix("O(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| syntax("malformed O-term"))?;
    let bound = parse_power(bound_text, ctx, &syntax)?;
    let head = head.trim();
    if head == "0" {
        return Ok(PadicNumber::zero_with_bound(ctx, bound));
    }
    let (power, list) = head
        .split_once('*')
        .ok_or_else(|| syntax("missing `*` between power and digits"))?;
    let valuation = parse_power(power.trim(), ctx, &syntax)?;
    let list = list
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| syntax("digit list must be bracketed"))?;
    let mut digits = Vec::new();
    for d in list.split(',') {
        let d: u32 = d
            .trim()
            .parse()
            .map_err(|_| syntax("digit is not a nonnegative integer"))?;
        if d >= ctx.prime() {
            return Err(syntax("digit out of range"));
        }
        digits.push(d);
    }
    from_digits(ctx, valuation, &digits, bound - valuation)
}

fn parse_power(
    text: &str,
    ctx: PadicContext,
    syntax: &dyn Fn(&str) -> Error,
) -> Result<i64> {
    let (base, exp) = text
        .split_once('^')
        .ok_or_else(|| syntax("expected p^e"))?;
    let base: u32 = base.trim().parse().map_err(|_| syntax("bad prime"))?;
    if base != ctx.prime() {
        return Err(Error::ContextMismatch);
    }
    exp.trim().parse().map_err(|_| syntax("bad exponent"))
}

/// Builds a number from little-endian digits; a digit list shorter than the
/// declared precision is padded with zeros.
fn from_digits(
    ctx: PadicContext,
    valuation: i64,
    digits: &[u32],
    precision: i64,
) -> Result<PadicNumber> {
    if digits.first().copied().unwrap_or(0) == 0 {
        return Err(Error::Syntax("leading digit d0 must be nonzero".into()));
    }
    if precision < digits.len() as i64 {
        return Err(Error::Syntax("more digits than the O-term allows".into()));
    }
    if precision > ctx.precision() as i64 {
        return Err(Error::ContextMismatch);
    }
    let p = BigUint::from(ctx.prime());
    let mantissa = digits
        .iter()
        .rev()
        .fold(BigUint::from(0u32), |acc, d| acc * &p + BigUint::from(*d));
    PadicNumber::from_parts(ctx, valuation, &mantissa, precision as u32)
}

/// `{"p":3,"valuation":-1,"digits":[1,0,2],"precision":2}`; `precision` is the
/// absolute precision `v + k`, and zero has `valuation: null` and no digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicJson {
    pub p: u32,
    pub valuation: Option<i64>,
    pub digits: Vec<u32>,
    pub precision: i64,
}

impl From<&PadicNumber> for PadicJson {
    fn from(a: &PadicNumber) -> Self {
        Self {
            p: a.prime(),
            valuation: a.valuation().ok(),
            digits: a.digits(),
            precision: a.absolute_precision(),
        }
    }
}

impl PadicJson {
    pub fn to_padic(&self, ctx: PadicContext) -> Result<PadicNumber> {
        if self.p != ctx.prime() {
            return Err(Error::ContextMismatch);
        }
        match self.valuation {
            None => Ok(PadicNumber::zero_with_bound(ctx, self.precision)),
            Some(v) => from_digits(ctx, v, &self.digits, self.precision - v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: i64, n: i64) -> PadicContext {
        PadicContext::new(p, n).unwrap()
    }

    #[test]
    fn render_examples() {
        let x = PadicNumber::from_rational(1, 3, ctx(3, 4)).unwrap();
        assert_eq!(render(&x), "3^-1 * [1,0,0,0] + O(3^3)");
        let z = PadicNumber::zero_with_bound(ctx(3, 10), 5);
        assert_eq!(render(&z), "0 + O(3^5)");
    }

    #[test]
    fn json_example() {
        let c = ctx(3, 3);
        // -1 + 0*3 + 2*9 over 3: valuation -1, digits [1,0,2]
        let x = parse("3^-1 * [1,0,2] + O(3^2)", c).unwrap();
        let json = serde_json::to_string(&PadicJson::from(&x)).unwrap();
        assert_eq!(json, r#"{"p":3,"valuation":-1,"digits":[1,0,2],"precision":2}"#);
        let back: PadicJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_padic(c).unwrap(), x);
    }

    #[test]
    fn parse_errors() {
        let c = ctx(3, 10);
        assert!(matches!(parse("3^0 * [1,0", c), Err(Error::Syntax(_))));
        assert!(matches!(parse("3^0 * [0,1] + O(3^2)", c), Err(Error::Syntax(_))));
        assert!(matches!(parse("3^0 * [3] + O(3^1)", c), Err(Error::Syntax(_))));
        assert_eq!(parse("5^0 * [1] + O(5^1)", c), Err(Error::ContextMismatch));
    }

    #[test]
    fn parse_pads_trimmed_digit_lists() {
        let c = ctx(3, 20);
        let one = parse("3^0 * [1] + O(3^20)", c).unwrap();
        assert_eq!(one, PadicNumber::one(c));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(p in prop::sample::select(vec![3i64, 5, 7, 11]),
                                   a in -100_000i64..100_000,
                                   b in 1i64..10_000,
                                   k in 1i64..40,
                                   cut in 0i64..40) {
            let c = ctx(p, k);
            let x = PadicNumber::from_rational(a, b, c).unwrap();
            let x = x.truncate_absolute(x.order() + cut);
            prop_assert_eq!(parse(&render(&x), c).unwrap(), x.clone());
            let json = PadicJson::from(&x);
            prop_assert_eq!(json.to_padic(c).unwrap(), x);
        }
    }
}
