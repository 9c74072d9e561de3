use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_patmat")).args(args).env_remove("PATMAT_MODE").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out) = run(args);
    (code, serde_json::from_str(&out).unwrap_or(Value::Null))
}

#[test]
fn adeg_examples() {
    let (code, v) = json(&["adeg", "--fn", "or", "--t", "2", "--eps", "1/3"]);
    assert_eq!(code, 0);
    assert_eq!(v["deg"], 2);
    assert_eq!(v["e_profile"], serde_json::json!(["1", "1/2", "0"]));
    let (_, v) = json(&["adeg", "--fn", "parity", "--t", "3", "--eps", "9/10"]);
    assert_eq!(v["deg"], 3);
    assert_eq!(run(&["adeg", "--fn", "or", "--t", "2", "--eps", "2"]).0, 1);
    assert_eq!(run(&["adeg", "--fn", "or", "--t", "2", "--eps", "0.5"]).0, 1);
}

#[test]
fn spectrum_examples() {
    let (code, v) = json(&["spectrum", "--fn", "or", "--t", "2", "--n", "4", "--verify"]);
    assert_eq!(code, 0);
    assert_eq!(v["entries"].as_array().unwrap().len(), 3);
    assert_eq!(v["verified"], true);
    let (_, v) = json(&["spectrum", "--fn", "const", "--t", "2", "--n", "4"]);
    assert_eq!(v["entries"].as_array().unwrap().len(), 1);
    assert_eq!(run(&["spectrum", "--fn", "or", "--t", "2", "--n", "100"]).0, 1);
}

#[test]
fn bounds_examples() {
    let (code, v) =
        json(&["bounds", "main-cc", "--fn", "or", "--t", "2", "--n", "4", "--eps", "1/3", "--delta", "1/7"]);
    assert_eq!(code, 2, "the OR₂ value is negative, hence vacuous");
    assert!((v["value"].as_f64().unwrap() - (0.5 - 0.5 * 63f64.log2())).abs() < 1e-12);
    let (_, v) = json(&["bounds", "razborov", "--predicate", "disj", "--n", "8"]);
    assert_eq!(v["inputs"]["l0"], "1");
    assert_eq!(run(&["bounds", "nope", "--fn", "or", "--t", "2"]).0, 1);
    let (code, _) = json(&["bounds", "disc-lower", "--fn", "or", "--t", "2", "--n", "4"]);
    assert_eq!(code, 0);
}

#[test]
fn simulate_examples() {
    let (code, v) =
        json(&["simulate", "weight", "--fn", "or", "--t", "2", "--n", "4", "--trials", "100000", "--seed", "7"]);
    assert_eq!(code, 0);
    assert!(v["monte_carlo"]["empirical"].as_f64().unwrap() >= 2.0 / 3.0 - 0.01);
    let (code, v) = json(&["simulate", "det", "--fn", "parity", "--t", "2", "--n", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["exhaustive"]["all_correct"], true);
    assert!(v["exhaustive"]["max_cost"].as_u64().unwrap() <= 6);
    let (_, v) = json(&["simulate", "weight", "--fn", "or", "--t", "2", "--n", "4"]);
    assert!(v.get("monte_carlo").is_none());
    assert_eq!(v["exact"]["min_advantage"], "1/3");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["adeg", "--fn", "or"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["witness", "--fn", "or", "--t", "2", "--kind", "ortho-distribution", "--d", "2"]).0, 2);
}

#[test]
fn sweep_keeps_order() {
    let (code, out) = run(&["sweep", "disc-upper", "--fns", "parity,or", "--ts", "2,1", "--format", "csv"]);
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], patmat::bounds::CSV_HEADER);
    let heads: Vec<(&str, &str)> = rows[1..]
        .iter()
        .map(|r| {
            let c: Vec<&str> = r.split(',').collect();
            (c[1], c[3])
        })
        .collect();
    // PARITY₂ = 6, PARITY₁ = 2, OR₂ = e, OR₁ = 2.
    assert_eq!(heads, [("6", "2"), ("2", "1"), ("e", "2"), ("2", "1")]);
}
