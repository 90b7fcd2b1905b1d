use std::fs;
use std::process::{Command, Output};

fn suppdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suppdec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .unwrap_or_else(|| panic!("no `{key}` line in\n{text}"))
        .trim()
}

#[test]
fn decode_noiseless_recovers_support() {
    let o = suppdec(&["decode", "--p", "16", "--s", "3", "--n", "12", "--sigma", "0", "--decoder", "exhaustive"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "true support"), field(&out, "estimate"));
    assert_eq!(field(&out, "exact recovery"), "true");
    assert_eq!(field(&out, "subsets evaluated"), "560");
}

#[test]
fn decode_is_deterministic_and_optimal() {
    let args = ["decode", "--p", "12", "--s", "3", "--n", "10", "--m2", "0.3", "--seed", "17"];
    let (a, b) = (suppdec(&args), suppdec(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let delta: f64 = field(&stdout(&a), "delta").parse().unwrap();
    assert!(delta <= 0.0);
    assert!(stderr(&a).contains("decode time"));
}

#[test]
fn decode_budget_refusal() {
    let o = suppdec(&["decode", "--p", "40", "--s", "12", "--n", "20"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("C(40,12)"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn decode_instance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.txt");
    let path_s = path.to_str().unwrap();
    let a = suppdec(&["decode", "--p", "9", "--s", "2", "--n", "7", "--seed", "4", "--emit-instance", path_s]);
    let b = suppdec(&["decode", "--instance", path_s]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1 + 7 + 2);
    assert!(text.starts_with("7 9 2 "));

    fs::write(&path, "7 9 2 1 0\n").unwrap();
    assert_eq!(suppdec(&["decode", "--instance", path_s]).status.code(), Some(2));
}

#[test]
fn bounds_values() {
    let o = suppdec(&["bounds", "--p", "128", "--s", "8", "--m2", "0.125", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let fano: f64 = field(&stdout(&o), "fano_ensemble").parse().unwrap();
    assert!((fano - 0.260655).abs() < 1e-6);

    let o = suppdec(&["bounds", "--p", "128", "--s", "8", "--m2", "0.125", "--C", "1", "--Cprime", "1"]);
    let out = stdout(&o);
    let suff: f64 = field(&out, "sufficient_n").split_whitespace().next().unwrap().parse().unwrap();
    let nec: f64 = field(&out, "necessary_n").split_whitespace().next().unwrap().parse().unwrap();
    assert!((suff - 38.30).abs() < 5e-3);
    assert!((nec - 22.18).abs() < 5e-3);
}

#[test]
fn bounds_json_and_validation() {
    let o = suppdec(&["bounds", "--p", "64", "--s", "4", "--m2", "0.25", "--n", "512", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["union"]["terms"].as_array().unwrap().len(), 4);
    assert_eq!(v["union"]["clipped"], 1.0);

    for args in [
        &["bounds", "--p", "8", "--s", "8", "--m2", "1"][..],
        &["bounds", "--p", "8", "--s", "9", "--m2", "1"],
        &["bounds", "--p", "8", "--s", "2", "--m2", "-1"],
        &["bounds", "--p", "8", "--s", "2", "--m2", "1", "--union-form", "loose"],
        &["bounds", "--p", "8"],
    ] {
        assert_eq!(suppdec(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_preset_rows_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let summary = dir.path().join("summary.json");
    for path in [&a, &b] {
        let o = suppdec(&[
            "sweep",
            "--preset",
            "sublinear-regime",
            "--trials",
            "50",
            "--out",
            path.to_str().unwrap(),
            "--summary",
            summary.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
        assert!(stderr(&o).contains("n=32"));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 1 + 5);
    assert!(text.starts_with("experiment_id,p,s,n,"));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["preset"], "sublinear-regime");
    assert_eq!(v["curves"][0]["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn sweep_config_file_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small\np = 10\ns = 2\nn_grid = 6, 12\ntrials = 20\ndecoder = exhaustive,omp,lasso\n").unwrap();
    let o = suppdec(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1 + 2 * 3);
    assert!(out.lines().skip(1).all(|l| l.split(',').count() == 22));
}

#[test]
fn sweep_validation_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "p = 10\ns = 2\nnn_grid = 4\n").unwrap();
    let o = suppdec(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nn_grid"));

    let o = suppdec(&["sweep", "--p", "10", "--s", "2", "--n-grid", "8,4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_grid"));

    let o = suppdec(&["sweep", "--preset", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lasso-gap"));
}

#[test]
fn verify_tails_small_sample_passes() {
    let o = suppdec(&["verify-tails", "--samples", "100", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 55);
    assert!(out.contains("WIDE-CI"));
}

#[test]
fn verify_tails_selftest_fails() {
    let o = suppdec(&["verify-tails", "--samples", "20000", "--selftest-break"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("FAIL")).count(), 1);
}

#[test]
fn presets_listing() {
    let o = suppdec(&["presets"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for name in ["sublinear-regime", "linear-regime", "lasso-gap"] {
        assert!(out.contains(&format!("# preset: {name}")));
    }
}
