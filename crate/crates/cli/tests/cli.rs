use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ggconvex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ggconvex"))
        .args(args)
        .env_remove("GG_SEED")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON report")
}

/// `(x, f)` rows with `f` as a float (`inf` allowed, `0` is 0).
fn read_csv(p: &Path) -> Vec<(f64, f64)> {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let (x, f) = l.split_once(',').unwrap();
            (x.parse().unwrap(), f.parse().unwrap())
        })
        .collect()
}

#[test]
fn conjugate_of_exp_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("fstar.csv");
    let o = ggconvex(&["conjugate", "--fn", "exp", "--grid", "1e-4:1e4:2048", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("# ggconvex ") && header.contains("conjugate") && header.contains(":2048"));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 2048);
    let mut checked = 0;
    for (y, v) in rows {
        // maximiser x = ln y must sit inside the primal grid
        if y > 1.5 && y < 1e4 {
            let ly = y.ln();
            let want = ly.powf(ly) / y;
            assert!((v / want - 1.0).abs() < 1e-3, "y = {y}: {v} vs {want}");
            checked += 1;
        }
    }
    assert!(checked > 500);
}

#[test]
fn conjugate_twice_round_trips() {
    let dir = TempDir::new().unwrap();
    let once = dir.path().join("fstar.csv");
    let twice = dir.path().join("back.csv");
    let o = ggconvex(&[
        "conjugate",
        "--fn",
        "poly:1,2,1",
        "--grid",
        "1e-2:1e2:1024",
        "--out",
        s(&once),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = ggconvex(&["conjugate", "--input", s(&once), "--out", s(&twice)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let back = read_csv(&twice);
    assert_eq!(back.len(), 1024);
    for (x, v) in back {
        // (1 + x)^2; log-slope 2x/(1+x) is resolved by the dual grid away from 0
        if (0.1..=50.0).contains(&x) {
            let want = (1.0 + x) * (1.0 + x);
            assert!((v / want - 1.0).abs() < 1e-3, "x = {x}: {v} vs {want}");
        }
    }
}

#[test]
fn biconjugate_of_gg_affine_is_exact() {
    let o = ggconvex(&["biconjugate", "--fn", "power:2:1.5", "--grid", "1e-2:1e2:257"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(2) {
        let (x, v) = line.split_once(',').unwrap();
        let (x, v): (f64, f64) = (x.parse().unwrap(), v.parse().unwrap());
        assert!((v / (2.0 * x.powf(1.5)) - 1.0).abs() < 1e-9, "x = {x}: {v}");
    }
}

#[test]
fn premium_of_two_point_law() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"{"atoms":[1,4],"probs":["1/2","1/2"]}"#);
    let o = ggconvex(&["premium", "--dist", s(&d), "--phi", "power:2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = String::from_utf8(o.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 8.5f64.sqrt()).abs() < 1e-9, "{v}");
    assert!(v.to_string().starts_with("2.9154759"));
    // the instance format gives the same answer
    let d = write(&dir, "i.json", r#"{"probs":[0.5,0.5],"values":[1,4]}"#);
    let o = ggconvex(&["premium", "--dist", s(&d), "--phi", "power:2", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!((stdout_json(&o)["value"].as_f64().unwrap() - 8.5f64.sqrt()).abs() < 1e-9);
}

#[test]
fn ga_cx_order_between_point_mass_and_spread() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"atoms":[1],"probs":["1"]}"#);
    let b = write(&dir, "b.json", r#"{"atoms":[0.5,2],"probs":["1/2","1/2"]}"#);
    let o = ggconvex(&["order", "--mode", "ga-cx", "--f", s(&a), "--g", s(&b)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["holds"], Value::Bool(true));

    // reversed: exit 2 with a counterexample that separates the laws
    let o = ggconvex(&["order", "--mode", "ga-cx", "--f", s(&b), "--g", s(&a)]);
    assert_eq!(o.status.code(), Some(2));
    let r = stdout_json(&o);
    assert_eq!(r["holds"], Value::Bool(false));
    let c = &r["counterexample"];
    let (lhs, rhs) = (c["lhs"].as_f64().unwrap(), c["rhs"].as_f64().unwrap());
    assert!(lhs > rhs);
    // E[(ln X - t)+] under the spread law at the reported threshold
    let t = c["t"].as_f64().unwrap();
    let direct = 0.5 * (0.5f64.ln() - t).max(0.0) + 0.5 * (2f64.ln() - t).max(0.0);
    if c["test"] == "upper-hinge" {
        assert!((lhs - direct).abs() < 1e-12);
    }
}

#[test]
fn consistency_and_crossing_reports() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"atoms":[1],"probs":["1"]}"#);
    let b = write(&dir, "b.json", r#"{"atoms":[0.5,2],"probs":["1/2","1/2"]}"#);
    let o = ggconvex(&[
        "consistency",
        "--spec",
        r#"{"kind":"p-norm","p":0.5}"#,
        "--f",
        s(&a),
        "--g",
        s(&b),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    let want = ((0.5f64.sqrt() + 2f64.sqrt()) / 2.0).powi(2);
    assert!((r["rho_g"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(r["consistent"], Value::Bool(true));

    // numeric probabilities are read as exact decimals, so they embed too
    let c = write(&dir, "c.json", r#"{"atoms":[0.5,1,2],"probs":[0.25,0.5,0.25]}"#);
    let o = ggconvex(&[
        "consistency",
        "--spec",
        r#"{"kind":"orlicz","family":"log-affine"}"#,
        "--f",
        s(&a),
        "--g",
        s(&c),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["states"], 4);

    let o = ggconvex(&["crossing", "--f", s(&a), "--g", s(&b)]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    assert_eq!(r["sign_changes"], 1);
    assert_eq!(r["applicable"], Value::Bool(true));
}

#[test]
fn classify_require_refutes_with_counterexample() {
    let o = ggconvex(&[
        "classify",
        "--fn",
        "poly:1,0,1",
        "--grid",
        "0.1:10:101",
        "--require",
        "gg",
    ]);
    assert_eq!(o.status.code(), Some(0));
    // exp(sin(ln x)) is not GG-convex
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("x,f\n");
    for i in 0..101 {
        let t = -2.0 + 4.0 * i as f64 / 100.0;
        csv.push_str(&format!("{},{}\n", f64::exp(t), t.sin().exp()));
    }
    let p = write(&dir, "wave.csv", &csv);
    let o = ggconvex(&["classify", "--input", s(&p), "--require", "gg"]);
    assert_eq!(o.status.code(), Some(2));
    let r = stdout_json(&o);
    assert_eq!(r["gg"], Value::Bool(false));
    let idx = r["gg_counterexample"]["indices"].as_array().unwrap();
    assert_eq!(idx.len(), 3);
}

#[test]
fn dual_gap_vanishes() {
    let dir = TempDir::new().unwrap();
    let d = write(&dir, "d.json", r#"{"atoms":[1,2,7],"probs":["1/4","1/2","0.25"]}"#);
    let o = ggconvex(&["dual-gap", "--dist", s(&d), "--p", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r = stdout_json(&o);
    let norm = (0.25f64 + 0.5 * 8.0 + 0.25 * 343.0).powf(1.0 / 3.0);
    assert!((r["p_norm"].as_f64().unwrap() - norm).abs() < 1e-12);
    assert!(r["gap"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn malformed_inputs_exit_1_with_location() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"atoms":[1],"probs":["1"]}"#);
    let broken = write(
        &dir,
        "broken.json",
        "{\"atoms\": [1, 2],\n \"probs\": [\"1/2\" \"1/2\"]}",
    );
    let o = ggconvex(&["order", "--mode", "st", "--f", s(&broken), "--g", s(&a)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");

    let field = write(&dir, "field.json", r#"{"atoms":[1,2],"probs":["1/2","half"]}"#);
    let o = ggconvex(&["order", "--mode", "st", "--f", s(&field), "--g", s(&a)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("probs[1]"));

    let csv = write(&dir, "bad.csv", "# comment\nx,f\n1,1\n2,oops\n4,3\n");
    let o = ggconvex(&["conjugate", "--input", s(&csv)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":4:") && err.contains("field f"), "{err}");

    let off = write(&dir, "off.csv", "x,f\n1,1\n3,1\n4,1\n");
    let o = ggconvex(&["conjugate", "--input", s(&off)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("off the log-uniform grid"));

    let o = ggconvex(&["conjugate", "--fn", "power:1", "--grid", "1:2:10"]);
    assert_eq!(o.status.code(), Some(1));
    let o = ggconvex(&["order", "--mode", "sideways", "--f", s(&a), "--g", s(&a)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_tokens_are_exact_at_the_extremes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ind.csv");
    let o = ggconvex(&[
        "conjugate",
        "--fn",
        "indicator:2:2:3",
        "--grid",
        "1:4:3",
        "--dual-grid",
        "0.5:2:5",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    // f⋄(y) = y^{ln 2} / 3 everywhere
    for (y, v) in read_csv(&out) {
        assert!((v - y.powf(2f64.ln()) / 3.0).abs() < 1e-12);
    }
    // the primal indicator itself uses the `inf` token off its support
    let o = ggconvex(&["biconjugate", "--fn", "indicator:2:2:3", "--grid", "1:4:3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.ends_with(",inf")), "{text}");
}

#[test]
fn selftest_json_is_reproducible() {
    let run = |extra: &[&str]| {
        let mut args = vec!["selftest", "--criterion", "5", "--json"];
        args.extend_from_slice(extra);
        ggconvex(&args)
    };
    let a = run(&["--seed", "7"]);
    let b = run(&["--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout_json(&a)["seed"], 7);

    let env = Command::new(env!("CARGO_BIN_EXE_ggconvex"))
        .args(["selftest", "--criterion", "5", "--json", "--seed", "1"])
        .env("GG_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout, "GG_SEED overrides --seed");
}
