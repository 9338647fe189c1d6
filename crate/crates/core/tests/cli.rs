use std::path::{Path, PathBuf};

use tempfile::TempDir;
use vecshap::cli::{self, EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE};
use vecshap::io;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run_with(std::iter::once("vecshap").chain(args.iter().copied()), &mut out, &mut err);
    Run { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

struct Workspace(TempDir);

impl Workspace {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, body: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_str().unwrap().to_owned()
    }
}

const WORKED_GAME: &str = r#"{"n": 3, "m": 1, "values": {"1": [1], "2": [0], "4": [0], "3": [3], "5": [1], "6": [0], "7": [4]}}"#;

const GAUSSIAN_MODEL: &str = r#"{
  "b0": [0.5, -1.0],
  "B": [[1.0, 0.0], [2.0, 1.0], [-1.0, 0.5]],
  "mu": [0.0, 1.0, -1.0],
  "sigma": [[1.0, 0.6, 0.1], [0.6, 2.0, -0.3], [0.1, -0.3, 1.5]]
}"#;

const POLY_MODEL: &str = r#"[
  [{"coeff": 1.0, "exponents": [1, 1, 0]}, {"coeff": -0.5, "exponents": [0, 0, 2]}],
  [{"coeff": 2.0, "exponents": [0, 1, 0]}, {"coeff": 0.25, "exponents": [1, 0, 1]}]
]"#;

const BACKGROUND: &str = "age,income,score\n0.1,0.2,0.3\n-0.5,1.0,0.0\n0.7,-0.2,1.1\n0.0,0.0,-0.4\n";

#[test]
fn shapley_engines_agree_on_worked_game() {
    let ws = Workspace::new();
    let game = ws.file("game.json", WORKED_GAME);
    let subset = run(&["shapley", "--game", &game]);
    assert_eq!(subset.code, EXIT_OK, "{}", subset.err);
    let (a, meta) = io::parse_attribution_csv(subset.out.as_bytes()).unwrap();
    let want = [7.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
    for (i, w) in want.iter().enumerate() {
        assert!((a.row(i)[0] - w).abs() < 1e-12);
    }
    assert!(meta.sum_check().unwrap() <= 1e-10);

    let out = ws.path("perm.csv");
    assert_eq!(run(&["shapley", "--game", &game, "--engine", "permutation", "--out", &out]).code, EXIT_OK);
    let (b, _) = io::read_attribution_csv(&out).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
}

#[test]
fn permutation_engine_refuses_large_games() {
    let ws = Workspace::new();
    let game = ws.file("big.json", r#"{"n": 11, "m": 1, "values": {"2047": [1]}}"#);
    let r = run(&["shapley", "--game", &game, "--engine", "permutation"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("n=10"));
    assert_eq!(run(&["shapley", "--game", &game]).code, EXIT_OK);
}

#[test]
fn malformed_inputs_are_usage_errors() {
    let ws = Workspace::new();
    let nonzero_empty = ws.file("g1.json", r#"{"n": 2, "m": 1, "values": {"0": [1]}}"#);
    let bad_mask = ws.file("g2.json", r#"{"n": 2, "m": 1, "values": {"4": [1]}}"#);
    let wrong_len = ws.file("g3.json", r#"{"n": 2, "m": 2, "values": {"1": [1]}}"#);
    let extra = ws.file("g4.json", r#"{"n": 2, "m": 1, "values": {}, "zzz": 1}"#);
    for g in [nonzero_empty, bad_mask, wrong_len, extra] {
        assert_eq!(run(&["shapley", "--game", &g]).code, EXIT_USAGE, "{g}");
    }
    let model = ws.file("asym.json", r#"{"b0": [0], "B": [[1], [1]], "mu": [0, 0], "sigma": [[1, 0.5], [0.4, 1]]}"#);
    let x = ws.file("x.json", "[1, 2]");
    assert_eq!(run(&["explain-gaussian", "--model", &model, "--instance", &x]).code, EXIT_USAGE);
}

#[test]
fn verify_reports_and_exit_codes() {
    let ws = Workspace::new();
    let report = ws.path("r.jsonl");
    let ok = run(&["verify", "--n", "4", "--m", "2", "--trials", "25", "--seed", "3", "--report", &report]);
    assert_eq!(ok.code, EXIT_OK);
    assert!(ok.out.starts_with("trials 25 "));
    assert!(ok.out.contains("failures 0"));
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(&report).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    for key in ["trial", "n", "m", "axiom", "residual", "tolerance", "pass"] {
        assert!(lines.iter().all(|l| l.get(key).is_some()), "missing {key}");
    }

    let strict = run(&["verify", "--n", "4", "--m", "2", "--trials", "5", "--seed", "3", "--tol-eff=-1"]);
    assert_eq!(strict.code, EXIT_CHECK_FAILED);
}

#[test]
fn verify_output_is_deterministic() {
    let ws = Workspace::new();
    let (r1, r2) = (ws.path("a.jsonl"), ws.path("b.jsonl"));
    let a = run(&["verify", "--n", "5", "--m", "3", "--trials", "60", "--seed", "9", "--report", &r1]);
    let b = run(&["verify", "--n", "5", "--m", "3", "--trials", "60", "--seed", "9", "--report", &r2]);
    assert_eq!(a.out, b.out);
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
}

#[test]
fn explain_gaussian_paths() {
    let ws = Workspace::new();
    let model = ws.file("m.json", GAUSSIAN_MODEL);
    let x = ws.file("x.json", "[0.3, -0.2, 1.4]");
    let both = run(&["explain-gaussian", "--model", &model, "--instance", &x]);
    assert_eq!(both.code, EXIT_OK, "{}", both.err);
    assert!(both.err.contains("max_abs_discrepancy"));
    let (analytic, meta) = io::parse_attribution_csv(both.out.as_bytes()).unwrap();
    assert_eq!(meta.comment("expectation_mode"), Some("conditional"));
    assert_eq!(meta.comment("path"), Some("analytic"));
    assert!(meta.sum_check().unwrap() <= 1e-9);

    let out = ws.path("exact.csv");
    let exact = run(&["explain-gaussian", "--model", &model, "--instance", &x, "--path", "exact", "--out", &out]);
    assert_eq!(exact.code, EXIT_OK);
    let (e, meta) = io::read_attribution_csv(&out).unwrap();
    assert_eq!(meta.comment("path"), Some("exact"));
    assert!(analytic.max_abs_diff(&e).unwrap() <= 1e-8);

    // a CSV row is accepted as the instance too
    let xcsv = ws.file("x.csv", "a,b,c\n0.3,-0.2,1.4\n");
    let from_csv = run(&["explain-gaussian", "--model", &model, "--instance", &xcsv, "--path", "analytic"]);
    let from_json = run(&["explain-gaussian", "--model", &model, "--instance", &x, "--path", "analytic"]);
    assert_eq!(from_csv.out, from_json.out);
}

#[test]
fn explain_black_box_models() {
    let ws = Workspace::new();
    let bg = ws.file("bg.csv", BACKGROUND);
    let x = ws.file("x.json", "[0.9, -0.3, 0.5]");
    for (name, body) in [("poly.json", POLY_MODEL), ("lin.json", GAUSSIAN_MODEL)] {
        let model = ws.file(name, body);
        let out = ws.path(&format!("{name}.csv"));
        let r = run(&["explain", "--model", &model, "--background", &bg, "--instance", &x, "--out", &out]);
        assert_eq!(r.code, EXIT_OK, "{}", r.err);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.contains("\nage,") && text.contains("\nscore,"));
        let (a, meta) = io::parse_attribution_csv(text.as_bytes()).unwrap();
        assert_eq!(meta.comment("expectation_mode"), Some("interventional"));
        assert!(meta.sum_check().unwrap() <= 1e-9);
        assert_eq!((a.n(), a.m()), (3, 2));
    }
    let short = ws.file("short.json", "[0.9, -0.3]");
    let poly = ws.path("poly.json");
    assert_eq!(run(&["explain", "--model", &poly, "--background", &bg, "--instance", &short]).code, EXIT_USAGE);
}

fn explain_to(ws: &Workspace, model: &str, x: &str, name: &str) -> PathBuf {
    let bg = ws.path("bg.csv");
    let out = ws.path(name);
    assert_eq!(run(&["explain", "--model", model, "--background", &bg, "--instance", x, "--out", &out]).code, EXIT_OK);
    PathBuf::from(out)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compare_attribution_files() {
    let ws = Workspace::new();
    ws.file("bg.csv", BACKGROUND);
    let poly = ws.file("poly.json", POLY_MODEL);
    let lin = ws.file("lin.json", GAUSSIAN_MODEL);
    let x1 = ws.file("x1.json", "[0.9, -0.3, 0.5]");
    let x2 = ws.file("x2.json", "[-0.2, 0.8, 0.1]");
    let a1 = explain_to(&ws, &poly, &x1, "a1.csv");
    let a2 = explain_to(&ws, &poly, &x2, "a2.csv");
    let b1 = explain_to(&ws, &lin, &x1, "b1.csv");

    let same = run(&["compare", "--a", s(&a1), "--b", s(&a1), "--output-index", "0"]);
    assert_eq!(same.code, EXIT_OK, "{}", same.err);
    assert_eq!(same.out, "cosine 1.000000\nspearman 1.000000\n");

    let multi = run(&["compare", "--a", s(&a1), s(&a2), "--b", s(&b1), "--output-index", "1", "--metrics", "cosine"]);
    assert_eq!(multi.code, EXIT_OK);
    let value: f64 = multi.out.trim().strip_prefix("cosine ").unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&value));

    assert_eq!(run(&["compare", "--a", s(&a1), "--b", s(&b1), "--output-index", "2"]).code, EXIT_USAGE);
    let zero = ws.file("zero.csv", "feature,out_0\nf0,0.0\nf1,0.0\n");
    assert_eq!(run(&["compare", "--a", &zero, "--b", s(&a1), "--output-index", "0"]).code, EXIT_USAGE);
}
