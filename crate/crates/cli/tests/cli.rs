use std::path::PathBuf;
use std::process::Command;

use padic_qgamma::padic::parse;
use padic_qgamma::{q_make, PadicContext, PadicNumber};
use padic_qgamma_cli::{run, Exit, Outcome};
use serde_json::Value;

fn qgamma(args: &str) -> Outcome {
    run(std::iter::once("qgamma").chain(args.split_whitespace()))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qgamma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn classical_euler_value() {
    let out = qgamma("eval --quantity classical-euler --n 3");
    assert_eq!(out.exit, Exit::Pass);
    assert_eq!(out.stdout, "1/4\n");
    assert_eq!(qgamma("eval --quantity classical-bernoulli --n 12").stdout, "-691/2730\n");
}

#[test]
fn q_euler_zero_is_one() {
    let out = qgamma("eval --quantity q-euler --p 3 --precision 20 --q 1,2 --n 0");
    assert_eq!(out.exit, Exit::Pass);
    let text = out.stdout.trim();
    assert!(text.starts_with("3^0 * [1"), "{text}");
    assert!(text.ends_with("+ O(3^20)"), "{text}");
    let ctx = PadicContext::new(3, 20).unwrap();
    assert_eq!(parse(text, ctx).unwrap(), PadicNumber::one(ctx));
    // the short form parses to the same number
    assert_eq!(parse("3^0 * [1] + O(3^20)", ctx).unwrap(), PadicNumber::one(ctx));
}

#[test]
fn bracket_of_two_is_one_plus_q() {
    let out = qgamma("eval --quantity bracket --p 3 --q 1,2 --x 2/1");
    assert_eq!(out.exit, Exit::Pass);
    let ctx = PadicContext::new(3, 30).unwrap();
    let q = q_make(1, 2, ctx).unwrap();
    let value = parse(out.stdout.trim(), ctx).unwrap();
    assert!(value.agrees_with(&(&PadicNumber::one(ctx) + q.value())));
}

#[test]
fn eval_json_and_csv() {
    let out = qgamma("eval --quantity q-euler --p 3,5,7 --q 1,2 --n 2 --format json");
    let rows: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    let out = qgamma("eval --quantity gamma --p 3 --q 1,2 --x 1/3 --format csv");
    assert_eq!(out.exit, Exit::Pass);
    assert!(out.stdout.starts_with("quantity,"));
    assert_eq!(out.stdout.lines().count(), 2);
}

#[test]
fn log_series_suite() {
    let out = qgamma("verify --suite eq6 --K 200 --format json");
    assert_eq!(out.exit, Exit::Pass);
    let reports: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(reports[0]["identity"], "eq6");
    assert_eq!(reports[0]["verdict"], "PASS");
}

#[test]
fn cocycle_suite_uses_100_pairs() {
    let out = qgamma("verify --suite eq9 --p 5 --q 2,2 --format json");
    assert_eq!(out.exit, Exit::Pass);
    let reports: Value = serde_json::from_str(&out.stdout).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 100);
    assert!(reports.iter().all(|r| r["verdict"] == "PASS"));
}

#[test]
fn bad_configuration_exits_2() {
    for args in [
        "verify --p 4",
        "verify --p 2",
        "verify --target 0",
        "verify --target 31",
        "verify --q 3,2 --p 3",
        "verify --q 1,0",
        "verify --suite nonsense",
        "verify --max-sum-exponent 20 --p 3",
        "eval --quantity gamma --x 1/2 --p 3",
        "verify --format yaml",
        "frobnicate",
        "verify --config /nonexistent/qgamma.conf",
    ] {
        let out = qgamma(args);
        assert_eq!(out.exit, Exit::BadConfig, "{args}: {}", out.stderr);
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unstabilized_sums() {
    let args = "verify --suite eq3 --p 3 --q 1,2 --x 2 --max-sum-exponent 2";
    let out = qgamma(args);
    assert_eq!(out.exit, Exit::Fail);
    assert!(out.stdout.contains("not_stabilized"));
    assert_eq!(qgamma(&format!("{args} --strict")).exit, Exit::NotStabilized);

    let args = "eval --quantity gamma --p 3 --q 1,2 --x 1/3 --target 28 --max-sum-exponent 3";
    let out = qgamma(args);
    assert_eq!(out.exit, Exit::Pass);
    assert!(out.stderr.contains("not stabilized"));
    assert_eq!(qgamma(&format!("{args} --strict")).exit, Exit::NotStabilized);
}

#[test]
fn unwritable_output_exits_4() {
    let out = qgamma("eval --quantity classical-euler --n 3 --out /nonexistent/dir/out.txt");
    assert_eq!(out.exit, Exit::Io);
    let path = scratch("euler.txt");
    let out = run(["qgamma", "eval", "--quantity", "classical-euler", "--n", "5", "--out"]
        .into_iter()
        .map(String::from)
        .chain([path.display().to_string()]));
    assert_eq!(out.exit, Exit::Pass);
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap(), "-1/2\n");
}

#[test]
fn flags_override_config_file() {
    let path = scratch("run.conf");
    std::fs::write(
        &path,
        "# classical values\ncommand = eval\nquantity = classical-euler\nn = 3\nformat = text\n",
    )
    .unwrap();
    let conf = path.display().to_string();
    let out = run(["qgamma", "--config", &conf]);
    assert_eq!(out.exit, Exit::Pass, "{}", out.stderr);
    assert_eq!(out.stdout, "1/4\n");
    let out = run(["qgamma", "--config", &conf, "--n", "5"]);
    assert_eq!(out.stdout, "-1/2\n");
    std::fs::write(&path, "command = eval\nbogus_key = 1\n").unwrap();
    assert_eq!(run(["qgamma", "--config", &conf]).exit, Exit::BadConfig);
}

#[test]
fn t_conjecture_report_has_no_verdict() {
    let out = qgamma("report --kind t-conjecture --p 3 --q 1,2 --x 1/3");
    assert_eq!(out.exit, Exit::Pass);
    let reports: Value = serde_json::from_str(&out.stdout).unwrap();
    let r = &reports[0];
    assert_eq!(r["identity"], "t-conjecture");
    assert!(r.get("verdict").is_none());
    for key in ["raw_diff_valuation", "bumped_diff_valuation", "direct_depth_used", "series_terms"] {
        assert!(r["details"].get(key).is_some(), "{key}");
    }
}

#[test]
fn discrepancy_report_carries_both_variants() {
    let out = qgamma("report --kind discrepancy --p 3 --q 1,2 --x 1/3");
    assert_eq!(out.exit, Exit::Pass);
    let reports: Value = serde_json::from_str(&out.stdout).unwrap();
    let printed = reports
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["identity"] == "thmA-as-printed")
        .unwrap();
    assert!(printed.get("verdict").is_none());
    assert!(printed["details"].get("as_printed").is_some());
    assert!(printed["details"].get("derived_coefficient").is_some());
}

#[test]
fn stability_table() {
    let out = qgamma("report --kind stability --quantity gamma --p 3 --x 1/3 --q 1,2");
    assert_eq!(out.exit, Exit::Pass);
    let mut rdr = csv::Reader::from_reader(out.stdout.as_bytes());
    let header = rdr.headers().unwrap().clone();
    let depth = header.iter().position(|h| h == "depth").unwrap();
    let diff = header.iter().position(|h| h == "plain_difference").unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 12);
    assert_eq!(&rows[0][depth], "1");
    assert_eq!(&rows[0][diff], "");
    let diffs: Vec<i64> = rows[1..].iter().map(|r| r[diff].parse().unwrap()).collect();
    assert!(diffs.windows(2).all(|w| w[1] >= w[0]), "{diffs:?}");
}

#[test]
fn output_is_deterministic() {
    let args = "verify --suite eq8 --p 3,5 --q 1,2 --q 2,3 --format json";
    let a = qgamma(args).stdout;
    assert_eq!(a, qgamma(args).stdout);
    assert_eq!(a, qgamma(&format!("{args} --workers 1")).stdout);
    assert_eq!(a, qgamma(&format!("{args} --workers 4")).stdout);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_qgamma");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["eval", "--quantity", "classical-euler", "--n", "3"]), Some(0));
    assert_eq!(code(&["verify", "--p", "9"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}
