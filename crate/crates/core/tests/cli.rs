use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_ensemble-gap");

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(BIN)
            .args(args)
            .env_remove("ENSEMBLE_GAP_CEILING")
            .current_dir(self.dir.path())
            .output()
            .unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stdout));
    })
}

#[test]
fn fit_regular_n4() {
    let ws = Workspace::new();
    ws.file("d.txt", "1 1 1 1\n");
    let o = ws.run(&["fit", "--degrees", "d.txt"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema"], "ensemble-gap/model/v1");
    for t in v["theta"].as_array().unwrap() {
        assert!((t.as_f64().unwrap() - 0.5 * 2f64.ln()).abs() < 1e-9);
    }
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn fit_rejects_invalid_input() {
    let ws = Workspace::new();
    ws.file("odd.txt", "1 1 1");
    ws.file("zero.txt", "0 1 1");
    ws.file("junk.txt", "1 x 1");
    assert_eq!(code(&ws.run(&["fit", "--degrees", "odd.txt"])), 2);
    assert_eq!(code(&ws.run(&["fit", "--degrees", "zero.txt"])), 2);
    assert_eq!(code(&ws.run(&["fit", "--degrees", "junk.txt"])), 2);
    assert_eq!(code(&ws.run(&["fit", "--degrees", "missing.txt"])), 2);
    assert_eq!(code(&ws.run(&["fit"])), 2);
}

#[test]
fn fit_reports_non_convergence() {
    let ws = Workspace::new();
    ws.file("d.txt", "1 2 2 3 3 3");
    assert_eq!(code(&ws.run(&["fit", "--degrees", "d.txt", "--max-iter", "0"])), 3);
}

#[test]
fn json_degree_files_are_accepted() {
    let ws = Workspace::new();
    ws.file("d.json", r#"{"n": 4, "degrees": [1, 1, 1, 1]}"#);
    assert_eq!(code(&ws.run(&["fit", "--degrees", "d.json"])), 0);
}

#[test]
fn entropy_flags() {
    let ws = Workspace::new();
    ws.file("d.txt", "1 1 1 1");
    let v = json(&ws.run(&["entropy", "--degrees", "d.txt", "--exact"]));
    assert_eq!(v["schema"], "ensemble-gap/entropy/v1");
    assert!((v["s_exact"].as_f64().unwrap() - (729.0f64 / 48.0).ln()).abs() < 1e-10);
    assert!(v["s_sparse"].is_null());

    let v = json(&ws.run(&["entropy", "--degrees", "d.txt", "--sparse"]));
    assert!((v["s_sparse"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert!(v["s_exact"].is_null());

    let v = json(&ws.run(&["entropy", "--degrees", "d.txt"]));
    assert!((v["ratio_exact_over_asymptotic"].as_f64().unwrap() - 1.045).abs() < 1e-3);
}

#[test]
fn entropy_exact_beyond_ceiling() {
    let ws = Workspace::new();
    ws.file("big.txt", &vec!["250"; 500].join(" "));
    let o = ws.run(&["entropy", "--degrees", "big.txt", "--exact"]);
    assert_eq!(code(&o), 4);

    ws.file("mid.txt", &vec!["3"; 18].join(" "));
    assert_eq!(code(&ws.run(&["entropy", "--degrees", "mid.txt", "--exact"])), 4);
    let o = Command::new(BIN)
        .args(["entropy", "--degrees", "mid.txt", "--exact"])
        .env("ENSEMBLE_GAP_CEILING", "18")
        .current_dir(ws.dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(code(&ws.run(&["entropy", "--degrees", "mid.txt", "--exact", "--ceiling", "18"])), 0);
}

#[test]
fn scan_csv_rows_sorted_by_n() {
    let ws = Workspace::new();
    let o = ws.run(&["scan", "--family", "regular", "--k", "3", "--n-list", "12,8,10"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,S_exact,S_asymptotic,S_sparse,alpha_n,s_alpha_exact,s_alpha_asymptotic,ratio,status"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["8", "10", "12"]);
    let gaps: Vec<f64> = rows
        .iter()
        .map(|r| {
            let n: f64 = r[0].parse().unwrap();
            let s: f64 = r[1].parse().unwrap();
            let sparse: f64 = r[3].parse().unwrap();
            (s - sparse).abs() / n
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn scan_half_regular_ratios() {
    let ws = Workspace::new();
    let o = ws.run(&["scan", "--family", "regular", "--k-frac", "0.5", "--n-list", "6,8,10,12", "--out", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["schema"], "ensemble-gap/scan/v1");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let k = r["degrees"][0].as_u64().unwrap();
        let n = r["n"].as_u64().unwrap();
        assert!(k == (n - 1) / 2 + 1 || k == n / 2);
        // Every point sits closer to 1 than the n = 4 value of about 1.045.
        assert!((r["ratio"].as_f64().unwrap() - 1.0).abs() < 0.045);
    }
}

#[test]
fn scan_rejects_empty_list() {
    let ws = Workspace::new();
    assert_eq!(code(&ws.run(&["scan", "--family", "regular"])), 2);
}

#[test]
fn scan_file_list() {
    let ws = Workspace::new();
    ws.file("a.txt", "1 1 1 1");
    ws.file("b.txt", "3 3 1 1");
    ws.file("c.txt", "2 2 2 2 2");
    let o = ws.run(&["scan", "--family", "file_list", "--files", "c.txt,b.txt,a.txt"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let ns: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["4", "5"]);
}

#[test]
fn verify_examples() {
    let ws = Workspace::new();
    ws.file("a.txt", "1 1 1 1");
    ws.file("b.txt", "1 1 2 2");
    ws.file("c.txt", "3 3 1 1");
    let o = ws.run(&["verify", "--degrees", "a.txt"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["all_passed"], true);

    let o = ws.run(&["verify", "--degrees", "b.txt"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    assert_eq!(v["dual"], serde_json::json!([2, 2, 1, 1]));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    assert_eq!(code(&ws.run(&["verify", "--degrees", "c.txt"])), 2);
}

#[test]
fn count_accepts_full_range() {
    let ws = Workspace::new();
    ws.file("a.txt", "3 3 3 3");
    ws.file("b.txt", "3 3 1 1");
    let v = json(&ws.run(&["count", "--degrees", "a.txt"]));
    assert_eq!(v["omega"], "1");
    let v = json(&ws.run(&["count", "--degrees", "b.txt"]));
    assert_eq!(v["omega"], "0");
    assert!(v["log_omega"].is_null());
}

#[test]
fn covariance_outputs() {
    let ws = Workspace::new();
    ws.file("d.txt", "1 1 1 1");
    let o = ws.run(&["covariance", "--degrees", "d.txt", "--out", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let first: Vec<f64> = text.lines().next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((first[0] - 2.0 / 3.0).abs() < 1e-9);
    assert!((first[1] - 2.0 / 9.0).abs() < 1e-9);

    let v = json(&ws.run(&["covariance", "--degrees", "d.txt", "--tail", "0.5"]));
    assert!((v["logdet_q"].as_f64().unwrap() - (256.0f64 / 2187.0).ln()).abs() < 1e-9);
    assert_eq!(v["tail"]["count"], 3);
}

#[test]
fn sample_is_deterministic() {
    let ws = Workspace::new();
    ws.file("d.txt", "2 2 2 2 2 2");
    let a = ws.run(&["sample", "--degrees", "d.txt", "--seed", "3", "--samples", "500"]);
    let b = ws.run(&["sample", "--degrees", "d.txt", "--seed", "3", "--samples", "500"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let e1 = ws.run(&["sample", "--degrees", "d.txt", "--seed", "3", "--edge-list"]);
    let e2 = ws.run(&["sample", "--degrees", "d.txt", "--seed", "3", "--edge-list"]);
    assert_eq!(e1.stdout, e2.stdout);
}

#[test]
fn pmf_and_regime() {
    let ws = Workspace::new();
    ws.file("d.txt", "5 5 5 5 5 5 5 5 5 5");
    let o = ws.run(&["pmf", "--degrees", "d.txt", "--node", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "k,probability");
    assert_eq!(text.lines().count(), 11);
    assert_eq!(code(&ws.run(&["pmf", "--degrees", "d.txt", "--node", "10"])), 2);

    let v = json(&ws.run(&["regime", "--degrees", "d.txt", "--delta", "0.25"]));
    assert!((v["regime"]["delta_hat"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-9);
    assert_eq!(v["regime"]["tame_flag"], true);
}
