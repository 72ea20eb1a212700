use num_bigint::BigInt;
use num_rational::BigRational;
use padic_qgamma::audit::Verdict;
use padic_qgamma::euler::{
    classical_bernoulli, classical_euler, q_bernoulli, q_euler_number, q_euler_polynomial,
    verify_bernoulli_checks, verify_euler_limit, verify_log_series, verify_q_euler_oracle,
    verify_translation_identity, EulerVariant,
};
use padic_qgamma::qanalog::rational;
use padic_qgamma::{q_make, PadicContext, PadicNumber, QParam};

const TARGET: i64 = 12;

fn q(p: i64, t: i64, m: i64) -> QParam {
    q_make(t, m, PadicContext::new(p, 30).unwrap()).unwrap()
}

fn grid() -> Vec<QParam> {
    let mut out = Vec::new();
    for p in [3, 5, 7] {
        for (t, m) in [(1, 2), (2, 2), (1, 3), (2, 3)] {
            out.push(q(p, t, m));
        }
    }
    out
}

fn depth(q: &QParam) -> u32 {
    match q.context().prime() {
        3 => 12,
        5 => 8,
        _ => 7,
    }
}

#[test]
fn classical_tables() {
    let e: Vec<String> = (0..=12).map(|n| classical_euler(n).unwrap().to_string()).collect();
    assert_eq!(
        e,
        ["1", "-1/2", "0", "1/4", "0", "-1/2", "0", "17/8", "0", "-31/2", "0", "691/4", "0"]
    );
    let b: Vec<String> = [2, 4, 6, 8, 10, 12]
        .iter()
        .map(|&n| classical_bernoulli(n).unwrap().to_string())
        .collect();
    assert_eq!(b, ["1/6", "-1/30", "1/42", "-1/30", "5/66", "-691/2730"]);
    assert!(classical_euler(64).is_ok());
    assert!(classical_euler(65).is_err());
}

#[test]
fn first_q_euler_numbers() {
    for q in grid() {
        let one = PadicNumber::one(q.context());
        assert!(q_euler_number(0, &q).unwrap().agrees_with(&one));
        let e1 = (-q.value()).try_div(&(&one + &q.value().pow(2).unwrap())).unwrap();
        assert!(q_euler_number(1, &q).unwrap().agrees_with(&e1));
    }
}

#[test]
fn closed_form_matches_the_integral() {
    for q in grid() {
        let p = q.context().prime() as i64;
        for x in [rational(0, 1), rational(1, 1), rational(-2, 1), rational(1, p)] {
            let x = x.unwrap();
            if x.denom() != &BigInt::from(1) && q.depth() < 2 {
                continue;
            }
            for r in verify_q_euler_oracle(6, &x, &q, TARGET, depth(&q)).unwrap() {
                assert_eq!(r.verdict, Some(Verdict::Pass), "{r:?}");
                assert!(!r.not_stabilized());
            }
        }
    }
}

#[test]
fn printed_exponent_differs_from_derived() {
    let q = q(3, 1, 2);
    let zero = BigRational::from_integer(BigInt::from(0));
    let x = BigRational::from_integer(BigInt::from(1));
    for m in 0..=4 {
        let d = q_euler_polynomial(m, &x, &q, EulerVariant::Derived).unwrap();
        let a = q_euler_polynomial(m, &x, &q, EulerVariant::AsPrinted).unwrap();
        assert!(!d.agrees_with(&a), "m = {m}");
        // at x = 0 every exponent vanishes
        let d = q_euler_polynomial(m, &zero, &q, EulerVariant::Derived).unwrap();
        let a = q_euler_polynomial(m, &zero, &q, EulerVariant::AsPrinted).unwrap();
        assert_eq!(d, a);
    }
}

#[test]
fn translation_identity() {
    for q in grid() {
        for n in 0..=10 {
            let r = verify_translation_identity(n, &q, TARGET).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.diff_valuation.unwrap() >= TARGET);
        }
    }
}

#[test]
fn log_series_identity_and_quoted_derivative() {
    let r = verify_log_series(200).unwrap();
    assert_eq!(r.verdict, Some(Verdict::Pass));
    assert_eq!(r.details["constant_term"], "0");
    assert!(r.details["derivative_first_mismatch"].is_null());
    assert_eq!(r.details["quoted_derivative_first_mismatch"], 1);
    assert!(verify_log_series(0).is_err());
    assert!(verify_log_series(201).is_err());
}

#[test]
fn q_euler_numbers_tend_to_classical() {
    for p in [3, 5, 7] {
        for m in 3..=8 {
            let q = q(p, 1, m);
            for n in 0..=8 {
                let r = verify_euler_limit(n, &q, 2).unwrap();
                assert!(r.passed(), "{r:?}");
                assert!(r.diff_valuation.unwrap() >= m - 2);
            }
        }
    }
}

#[test]
fn regression_values_near_one() {
    let q = q(3, 1, 6);
    let ctx = q.context();
    let close = |n: usize, a: i64, b: i64| {
        let e = q_euler_number(n, &q).unwrap();
        let c = PadicNumber::from_rational(a, b, ctx).unwrap();
        assert!(e.diff_valuation(&c).unwrap() >= 4, "E_{n}");
    };
    close(0, 1, 1);
    close(1, -1, 2);
    close(3, 1, 4);
}

#[test]
fn bernoulli_checks() {
    for q in grid() {
        for r in verify_bernoulli_checks(&q, TARGET, depth(&q), 2).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }
    for p in [3, 5] {
        for m in 3..=6 {
            let q = q(p, 1, m);
            let reports = verify_bernoulli_checks(&q, TARGET, depth(&q), 2).unwrap();
            let b1 = reports.iter().find(|r| r.identity == "limits").unwrap();
            assert!(b1.diff_valuation.unwrap() >= m - 2, "{b1:?}");
        }
    }
}

#[test]
fn unstabilized_bernoulli_is_an_error() {
    let q = q(3, 1, 2);
    assert!(q_bernoulli(2, &q, 25, 2).is_err());
    assert!(q_bernoulli(2, &q, TARGET, depth(&q)).is_ok());
}
