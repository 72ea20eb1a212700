use num_bigint::BigInt;
use num_rational::BigRational;
use padic_qgamma::padic::valuation_of_int;
use padic_qgamma::qanalog::{
    q_bracket, q_bracket_int, q_bracket_rational, q_pow, q_pow_int, q_pow_rational, rational,
    verify_cocycle,
};
use padic_qgamma::{q_make, PadicContext, PadicNumber, QParam};
use proptest::prelude::*;

const N: i64 = 30;

fn q(p: i64, t: i64, m: i64) -> QParam {
    q_make(t, m, PadicContext::new(p, N).unwrap()).unwrap()
}

fn valuation(x: &BigRational, p: i64) -> i64 {
    valuation_of_int(x.numer(), p as u32) as i64 - valuation_of_int(x.denom(), p as u32) as i64
}

/// `(p, t, m)` over the acceptance grid plus depth 1.
fn qspec() -> impl Strategy<Value = (i64, i64, i64)> {
    (
        prop::sample::select(vec![3i64, 5, 7]),
        prop::sample::select(vec![1i64, 2, -1]),
        1i64..=3,
    )
}

/// A rational `a / (b p^j)` with `p ∤ b` and `j < m`, so that `q^x` exists.
fn exponent(p: i64, m: i64) -> impl Strategy<Value = BigRational> {
    (-10_000i64..=10_000, 1i64..=60, 0..m).prop_map(move |(a, b, j)| {
        let b = if b % p == 0 { b + 1 } else { b };
        BigRational::new(BigInt::from(a), BigInt::from(b) * BigInt::from(p).pow(j as u32))
    })
}

fn grid_point() -> impl Strategy<Value = (QParam, BigRational, BigRational)> {
    qspec().prop_flat_map(|(p, t, m)| {
        (Just(q(p, t, m)), exponent(p, m), exponent(p, m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cocycle_identity((q, x, z) in grid_point()) {
        let r = verify_cocycle(&x, &z, &q, 20).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn q_pow_is_additive((q, x, y) in grid_point()) {
        let lhs = q_pow_rational(&q, &(&x + &y)).unwrap();
        let rhs = &q_pow_rational(&q, &x).unwrap() * &q_pow_rational(&q, &y).unwrap();
        prop_assert!(lhs.agrees_with(&rhs));
        prop_assert!(lhs.diff_valuation(&rhs).unwrap() >= 20);
    }

    /// `v_p([x]_q - x) >= m + v_p(x) + min(v_p(x), 0)`, sharp on samples.
    #[test]
    fn bracket_tends_to_identity((q, x, _z) in grid_point()) {
        prop_assume!(x != BigRational::from_integer(0.into()));
        let p = q.context().prime() as i64;
        let v = valuation(&x, p);
        let m = q.depth() as i64;
        let bracket = q_bracket_rational(&x, &q).unwrap();
        let plain = PadicNumber::from_bigrational(&x, q.context());
        prop_assert!(bracket.diff_valuation(&plain).unwrap() >= m + v + v.min(0));
        prop_assert_eq!(bracket.valuation().unwrap(), v);
    }
}

#[test]
fn bracket_of_integers_is_the_geometric_polynomial() {
    for (p, t, m) in [(3, 1, 2), (5, 2, 1), (7, -1, 3)] {
        let q = q(p, t, m);
        let ctx = q.context();
        let mut poly = PadicNumber::zero(ctx);
        for n in 0..=50i64 {
            let by_exp = q_bracket(&PadicNumber::from_i64(n, ctx), &q).unwrap();
            assert!(by_exp.agrees_with(&poly), "p={p} n={n}");
            let exact = q_bracket_int(n, &q);
            assert!(exact.agrees_with(&poly), "p={p} n={n}");
            // dividing by 1 - q costs exactly m digits
            assert_eq!(exact.absolute_precision(), N - m, "p={p} n={n}");
            poly = &poly + &q_pow_int(&q, n);
        }
    }
}

#[test]
fn integer_powers_agree_with_exp() {
    let q = q(5, 2, 2);
    for n in [-30i64, -3, 0, 1, 7, 125, 3000] {
        let e = q_pow(&q, &PadicNumber::from_i64(n, q.context())).unwrap();
        assert!(e.agrees_with(&q_pow_int(&q, n)), "n = {n}");
    }
    let fifth_root = q_pow_rational(&q, &rational(1, 5).unwrap()).unwrap();
    assert!(fifth_root.pow(5).unwrap().agrees_with(q.value()));
}
