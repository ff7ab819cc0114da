use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn bdrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdrep")).args(args).output().expect("spawn bdrep")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = bdrep(args);
    (o.status.code().unwrap_or(-1), String::from_utf8(o.stdout).unwrap(), String::from_utf8(o.stderr).unwrap())
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn normalize_reports_spectral_radius_three() {
    let (code, out, err) = run(&["normalize", p(&data("spherical-unscaled.json"))]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("spectral radius 3"), "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let h = v["maps"]["b|a"][0][0].as_f64().unwrap();
    assert!((h - 1.0 / 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn normalize_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let once = dir.path().join("once.json");
    let twice = dir.path().join("twice.json");
    assert_eq!(run(&["normalize", p(&data("spherical-unscaled.json")), "-o", p(&once)]).0, 0);
    let (code, _, err) = run(&["normalize", p(&once), "-o", p(&twice)]);
    assert_eq!(code, 0);
    assert!(err.contains("spectral radius 1"), "{err}");
    let a: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&once).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&twice).unwrap()).unwrap();
    for (k, m) in a["maps"].as_object().unwrap() {
        let x = m[0][0].as_f64().unwrap();
        let y = b["maps"][k][0][0].as_f64().unwrap();
        assert!((x - y).abs() < 1e-12, "{k}");
    }
}

#[test]
fn spherical_coefficients() {
    let sys = data("spherical.json");
    let vec = data("vector-a.json");
    let (code, out, err) = run(&["coefficients", p(&sys), "--vector", p(&vec), "--words", "e,a,b"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("# command=coefficients seed=0 backend=fast"));
    let r = rows(&out);
    assert_eq!(r[0][..2], ["e", "1"]);
    assert_eq!(r[1][..2], ["a", "0.577350269189626"]);
    assert_eq!(r[2][..2], ["b", "0"]);
}

#[test]
fn both_backends_and_exact_column() {
    let sys = data("spherical.json");
    let vec = data("vector-a.json");
    let (code, out, err) =
        run(&["coefficients", p(&sys), "--vector", p(&vec), "--words", "a,ab,aBa", "--backend", "both", "--exact"]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    for row in &r {
        assert_eq!(row.len(), 7);
        let d: f64 = row[5].parse().unwrap();
        assert!(d <= 1e-12, "{row:?}");
    }
    assert_eq!(r[1][6], "1/3");
}

#[test]
fn empty_word_list_gives_header_only() {
    let (code, out, _) = run(&["coefficients", p(&data("spherical.json")), "--words", ""]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn coefficients_are_deterministic_per_seed() {
    let sys = data("spherical.json");
    let a = run(&["coefficients", p(&sys), "--words", "a,bA,ab", "--seed", "7"]).1;
    let b = run(&["coefficients", p(&sys), "--words", "a,bA,ab", "--seed", "7"]).1;
    let c = run(&["coefficients", p(&sys), "--words", "a,bA,ab", "--seed", "8"]).1;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn thread_count_does_not_change_output() {
    let sys = data("spherical.json");
    let args = ["coefficients", p(&sys), "--words", "abab,aBAb", "--backend", "brute", "--seed", "3"];
    let one = run(&[&args[..], &["--threads", "1"]].concat()).1;
    let four = run(&[&args[..], &["--threads", "4"]].concat()).1;
    assert_eq!(one, four);
}

#[test]
fn herz_row_for_a_is_tight() {
    let (code, out, err) =
        run(&["herz", p(&data("spherical.json")), "--vector", p(&data("vector-a.json")), "--radius", "2"]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    let a = r.iter().find(|row| row[0] == "a").unwrap();
    assert_eq!(a[1], "2");
    let lhs: f64 = a[2].parse().unwrap();
    let rhs: f64 = a[3].parse().unwrap();
    assert!((lhs - rhs).abs() < 1e-12);
    assert!((rhs - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    assert!(r.iter().all(|row| row[5] == "pass"));
}

#[test]
fn index_two_induction_and_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let ind = dir.path().join("ind.json");
    let (code, _, err) =
        run(&["induce", p(&data("spherical-rank3.json")), p(&data("quotient-index2.json")), "-o", p(&ind)]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("induced dims [4, 4, 2, 2]"), "{err}");
    let (code, out, err) = run(&["decompose", p(&ind)]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["components"].as_array().unwrap().len(), 1);
    assert_eq!(v["null_dims"]["a"], 2);
    assert_eq!(v["null_dims"]["b"], 0);
}

#[test]
fn index_one_induction_reproduces_the_system() {
    let (code, out, err) = run(&["induce", p(&data("spherical.json")), p(&data("quotient-index1.json"))]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let h = v["maps"]["b|a"][0][0].as_f64().unwrap();
    assert!((h - 1.0 / 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn vf_induce_on_the_builtin_datum() {
    let (code, out, err) = run(&["vf-induce", p(&data("psl2z.json")), p(&data("spherical.json")), "--radius", "2"]);
    assert_eq!(code, 0, "{err}");
    assert!(rows(&out).iter().any(|r| r[0] == "e"));
}

#[test]
fn demo_decays_geometrically() {
    let (code, out, _) = run(&["demo-no-hc", "--system", p(&data("spherical.json")), "--vector", p(&data("vector-a.json"))]);
    assert_eq!(code, 0);
    let phi: Vec<f64> = rows(&out).iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(phi.len(), 6);
    for (n, v) in phi.iter().enumerate() {
        assert!((v - 3f64.powf(-((n + 1) as f64) / 2.0)).abs() < 1e-9, "{n}: {v}");
    }
}

#[test]
fn selftest_passes() {
    let (code, out, _) = run(&["selftest"]);
    assert_eq!(code, 0);
    assert!(!out.contains("FAIL"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["normalize", p(&data("zero-maps.json"))]).0, 2);
    assert_eq!(run(&["coefficients", p(&data("spherical.json")), "--words", "xyz"]).0, 1);
    assert_eq!(run(&["coefficients", p(&data("spherical-unscaled.json")), "--words", "a"]).0, 1);
    assert_eq!(run(&["normalize", p(&data("missing.json"))]).0, 1);
    assert_eq!(run(&["--cap", "10", "selftest"]).0, 1);
    assert_eq!(run(&["bogus"]).0, 1);
    assert_eq!(run(&["--help"]).0, 0);
    assert_eq!(run(&["coefficients", p(&data("spherical.json")), "--words", "abababababababababababab", "--backend", "brute", "--cap", "1000"]).0, 3);
}
