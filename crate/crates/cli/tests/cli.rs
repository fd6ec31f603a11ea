use std::process::{Command, Output};

use dcongr_cli::{parse, Expr};
use proptest::prelude::*;
use serde_json::Value;

fn dcongr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcongr"))
        .args(args)
        .env_remove("DCONGR_PRIME")
        .env_remove("DCONGR_PREC")
        .output()
        .unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = dcongr(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    serde_json::from_str(&stdout(&all)).unwrap()
}

fn error(args: &[&str]) -> (i32, Value) {
    let out = dcongr(args);
    let obj = serde_json::from_slice(&out.stderr).unwrap();
    (out.status.code().unwrap(), obj)
}

#[test]
fn norm_of_a_level_one_unit() {
    assert_eq!(
        stdout(&["norm", "--level", "1", "(1-p*D)"]).trim(),
        "1 (log_p = 0)"
    );
    assert_eq!(json(&["norm", "--level", "1", "(1-p*D)"])["log_p"], 0);
}

#[test]
fn hensel_on_the_truncated_product() {
    let out = stdout(&["hensel", "--level", "2", "prod(n=1..6, 1 - p^n*D)"]);
    assert!(out.starts_with("dominant order: 2\n"));
    assert_eq!(
        json(&["hensel", "--level", "2", "prod(n=1..6, 1 - p^n*D)"])["dominant_order"],
        2
    );
}

#[test]
fn cycle_of_a_dirac_power() {
    let v = json(&["charcycle", "--level", "1", "t^2*(p*D)^3"]);
    assert_eq!(v["horizontal"], 3);
    assert_eq!(v["vertical"][0]["point"], "t");
    assert_eq!(v["vertical"][0]["mult"], 2);
    assert_eq!(
        stdout(&["charcycle", "--level", "1", "t^2*(p*D)^3"]).trim(),
        "3*[xi = 0] + 2*[t = 0]"
    );
}

#[test]
fn direct_sums_add_cycles() {
    let v = json(&["charcycle", "--level", "1", "t", ";", "p*D"]);
    assert_eq!(v["horizontal"], 1);
    assert_eq!(v["vertical"][0]["mult"], 1);
}

#[test]
fn tower_of_a_connection() {
    let v = json(&["tower", "t*(t-1)*D + 1"]);
    assert_eq!(v["m"], 3);
    assert_eq!(v["member"], true);
    let v = json(&["tower", "--product", "--horizon", "4"]);
    assert_eq!(v["m"], "unbounded");
    assert_eq!(v["member"], false);
}

#[test]
fn leading_minus_after_double_dash() {
    assert_eq!(
        stdout(&["nbar", "--level", "1", "--", "-t^2*(p*D)^3 + 1"]).trim(),
        "3"
    );
}

#[test]
fn exit_codes() {
    let (code, v) = error(&["norm", "1 +"]);
    assert_eq!(
        (code, v["error"]["kind"].as_str()),
        (2, Some("SyntaxError"))
    );
    assert_eq!(v["error"]["offset"], 3);
    let (code, v) = error(&["invert", "t*D + t"]);
    assert_eq!(
        (code, v["error"]["kind"].as_str()),
        (3, Some("NotInvertible"))
    );
    let (code, v) = error(&["--prec", "2", "basis", "t^2 + p*D", "t*D + p^2"]);
    assert_eq!(
        (code, v["error"]["kind"].as_str()),
        (4, Some("PrecisionExhausted"))
    );
    let (code, v) = error(&["tower", "--horizon", "4", "p^4*D^2 + D"]);
    assert_eq!(
        (code, v["error"]["kind"].as_str()),
        (5, Some("HorizonInconclusive"))
    );
}

#[test]
fn json_errors_also_reach_stdout() {
    let out = dcongr(&["--json", "invert", "t"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "NotInvertible");
}

#[test]
fn json_is_deterministic() {
    for args in [
        &["--json", "basis", "--level", "1", "t^2", "p*D"][..],
        &["--json", "hensel", "--level", "1", "(1 - p*D)*(1 - p^2*D)"],
        &["--json", "normsuite"],
        &["--json", "charcycle", "--level", "1", "t*(t-1)*p*D + 1"],
    ] {
        let a = dcongr(args);
        let b = dcongr(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn printed_operators_reparse() {
    let product = stdout(&["mul", "--level", "1", "t + p*D", "t^2 - 3*p*D"]);
    let again = stdout(&["mul", "--level", "1", product.trim(), "1"]);
    assert_eq!(product, again);
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0i64..20).prop_map(Expr::int),
        Just(Expr::Sym(dcongr_cli::expr::Sym::P)),
        Just(Expr::Sym(dcongr_cli::expr::Sym::T)),
        Just(Expr::Sym(dcongr_cli::expr::Sym::D)),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let b = |e: Expr| Box::new(e);
        prop_oneof![
            inner.clone().prop_map(move |a| Expr::Neg(b(a))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Expr::Mul(b(x), b(y))),
            (inner.clone(), 1i64..9).prop_map(move |(x, n)| Expr::Div(b(x), b(Expr::int(n)))),
            (inner, 0i64..5).prop_map(move |(x, n)| Expr::Pow(b(x), b(Expr::int(n)))),
        ]
    })
}

proptest! {
    #[test]
    fn parse_inverts_printing(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(parse(&text).unwrap(), e, "{}", text);
    }
}
