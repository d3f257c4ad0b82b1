use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tempowave(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tempowave"))
        .args(args)
        .current_dir(cwd)
        .env_remove("TEMPOWAVE_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

/// Two 5-cliques joined by the edge (4, 5), repeated on `t` layers.
fn write_cliques(path: &Path, t: usize) {
    let mut s = format!("N 10 T {t}\n");
    for layer in 1..=t {
        s += &format!("{layer} 4 5 1\n");
        for base in [0, 5] {
            for i in 0..5 {
                for j in i + 1..5 {
                    s += &format!("{layer} {} {} 1\n", base + i, base + j);
                }
            }
        }
    }
    std::fs::write(path, s).unwrap();
}

fn small_granell(dir: &Path) {
    ok(&tempowave(&["generate", "granell", "--model", "merge", "--nodes", "32", "--layers", "8", "--seed", "4", "--out", "bench"], dir));
}

#[test]
fn generate_sp_writes_three_truths_and_reports_size() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&tempowave(&["generate", "sp", "--class", "lsc", "--rho", "1", "--kbar", "16", "--seed", "0", "--out", "sp"], dir.path()));
    assert!(stdout.contains("N = 640") && stdout.contains("T = 33"), "{stdout}");
    for f in ["edges.tsv", "truth_small.csv", "truth_medium.csv", "truth_large.csv", "metadata.json"] {
        assert!(dir.path().join("sp").join(f).exists(), "{f}");
    }
    let meta = json(&dir.path().join("sp/metadata.json"));
    assert_eq!(meta["merge_layer"], 11);
    assert_eq!(meta["params"]["change"], "lsc");
}

#[test]
fn generate_granell_defaults_to_128_nodes_and_100_layers() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&tempowave(&["generate", "granell", "--model", "grow", "--seed", "1", "--out", "g"], dir.path()));
    assert!(stdout.contains("N = 128") && stdout.contains("T = 100"), "{stdout}");
    let header = std::fs::read_to_string(dir.path().join("g/edges.tsv")).unwrap();
    assert!(header.starts_with("N 128 T 100"));
}

#[test]
fn usage_mistakes_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["generate", "sp", "--rho", "1", "--kbar", "16", "--seed", "0", "--out", "x"],
        &["generate", "granell", "--model", "grow", "--out", "x"],
        &["generate", "sp", "--class", "ssc", "--rho", "9", "--seed", "0", "--out", "x"],
        &["detect", "--input", "missing.tsv", "--out", "x"],
        &["detect", "--weights", "constant:-2", "--seed", "1", "--input", "e.tsv", "--out", "x"],
        &["no-such-command"],
    ];
    for args in cases {
        assert_eq!(code(&tempowave(args, dir.path())), 2, "{args:?}");
    }
}

#[test]
fn corrupted_edge_list_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.tsv"), "N 4 T 2\n1 0 1 1\n2 0 x 1\n").unwrap();
    let out = tempowave(&["detect", "--input", "bad.tsv", "--out", "r", "--seed", "0"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert!(!dir.path().join("r").exists());
}

#[test]
fn unreadable_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tempowave(&["detect", "--input", "nope.tsv", "--out", "r", "--seed", "0"], dir.path());
    assert_eq!(code(&out), 3);
}

#[test]
fn help_documents_the_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&tempowave(&["--help"], dir.path()));
    for line in ["Exit codes:", "2  usage error", "3  I/O error", "4  inconsistent", "5  numerical", "TEMPOWAVE_CACHE_DIR"] {
        assert!(stdout.contains(line), "{line}");
    }
}

#[test]
fn decoupled_cliques_stop_at_the_layer_count_plus_one() {
    let dir = tempfile::tempdir().unwrap();
    write_cliques(&dir.path().join("toy.tsv"), 3);
    let stdout = ok(&tempowave(
        &["detect", "--input", "toy.tsv", "--out", "r", "--omega", "0", "--mode", "exact", "--scales", "5", "--seed", "0"],
        dir.path(),
    ));
    assert!(stdout.contains("q = 4"), "{stdout}");
    let rec = json(&dir.path().join("r/result.json"));
    assert_eq!(rec["q_index"], 4);
    assert_eq!(rec["weights"], "constant:0");
    assert_eq!(rec["scales"].as_array().unwrap().len(), 5);
}

#[test]
fn strong_coupling_on_the_toy_gives_a_node_identity_scale() {
    // some scale groups each node with itself across layers and nothing else
    let dir = tempfile::tempdir().unwrap();
    write_cliques(&dir.path().join("toy.tsv"), 2);
    ok(&tempowave(
        &["detect", "--input", "toy.tsv", "--out", "r", "--omega", "10", "--mode", "exact", "--scales", "10", "--seed", "0"],
        dir.path(),
    ));
    let rec = json(&dir.path().join("r/result.json"));
    let counts: Vec<u64> = rec["scales"].as_array().unwrap().iter().map(|s| s["n_communities"].as_u64().unwrap()).collect();
    let k = counts.iter().position(|&c| c == 10).unwrap_or_else(|| panic!("no scale with N communities: {counts:?}"));
    let labels = std::fs::read_to_string(dir.path().join(format!("r/labels_scale_{k:02}.csv"))).unwrap();
    let rows: Vec<Vec<usize>> = labels.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    for r in &rows {
        let twin = rows.iter().find(|o| o[0] == r[0] && o[1] != r[1]).unwrap();
        assert_eq!(r[2], twin[2], "node {} split across layers", r[0]);
    }
}

#[test]
fn detect_then_evaluate_produces_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    small_granell(dir.path());
    ok(&tempowave(
        &["detect", "--input", "bench/edges.tsv", "--out", "res", "--seed", "3", "--scales", "6", "--repetitions", "3", "--eta", "40"],
        dir.path(),
    ));
    for k in 0..6 {
        assert!(dir.path().join(format!("res/labels_scale_{k:02}.csv")).exists());
    }
    let stability = std::fs::read_to_string(dir.path().join("res/stability.csv")).unwrap();
    assert_eq!(stability.lines().count(), 7);
    let stdout = ok(&tempowave(&["evaluate", "--result", "res", "--truth", "bench/truth_truth.csv", "--out", "ev"], dir.path()));
    assert!(stdout.contains("truth: success rate"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("ev/evaluation.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "scale_index,scale,ari_truth,std_truth,instability");
    assert_eq!(csv.lines().count(), 7);
    let ev = json(&dir.path().join("ev/evaluation.json"));
    assert_eq!(ev["truths"][0]["curve"].as_array().unwrap().len(), 6);
}

#[test]
fn perfect_labels_score_one() {
    let dir = tempfile::tempdir().unwrap();
    small_granell(dir.path());
    ok(&tempowave(
        &["detect", "--input", "bench/edges.tsv", "--out", "res", "--seed", "0", "--scales", "3", "--repetitions", "1", "--eta", "20"],
        dir.path(),
    ));
    for k in 0..3 {
        std::fs::copy(dir.path().join("bench/truth_truth.csv"), dir.path().join(format!("res/labels_scale_{k:02}.csv"))).unwrap();
    }
    ok(&tempowave(&["evaluate", "--result", "res", "--truth", "planted=bench/truth_truth.csv", "--out", "ev"], dir.path()));
    let ev = json(&dir.path().join("ev/evaluation.json"));
    assert_eq!(ev["truths"][0]["name"], "planted");
    assert_eq!(ev["truths"][0]["success_rate"], 1.0);
}

#[test]
fn truth_with_other_dimensions_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    small_granell(dir.path());
    ok(&tempowave(
        &["detect", "--input", "bench/edges.tsv", "--out", "res", "--seed", "0", "--scales", "3", "--repetitions", "1", "--eta", "20"],
        dir.path(),
    ));
    std::fs::write(dir.path().join("truth_wrong.csv"), "node,layer,community\n0,1,0\n1,1,0\n").unwrap();
    let out = tempowave(&["evaluate", "--result", "res", "--truth", "truth_wrong.csv", "--out", "ev"], dir.path());
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
}

fn without_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("created_unix");
    v
}

#[test]
fn same_config_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    small_granell(dir.path());
    let config = r#"{"seed": 11, "input": "bench/edges.tsv", "detect": {"n_scales": 4, "eta": 30, "repetitions": 2}}"#;
    std::fs::write(dir.path().join("exp.json"), config).unwrap();
    for out in ["a", "b"] {
        ok(&tempowave(&["detect", "--config", "exp.json", "--out", out], dir.path()));
    }
    let (a, b) = (json(&dir.path().join("a/result.json")), json(&dir.path().join("b/result.json")));
    assert_eq!(without_timestamp(a.clone()), without_timestamp(b));
    assert_eq!(a["seed"], 11);
    assert_eq!(a["eta"], 30);
    for f in ["labels_scale_00.csv", "labels_scale_03.csv", "stability.csv"] {
        assert_eq!(std::fs::read(dir.path().join("a").join(f)).unwrap(), std::fs::read(dir.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    small_granell(dir.path());
    let config = r#"{"seed": 1, "detect": {"n_scales": 4, "eta": 30, "repetitions": 1, "weights": "lart"}}"#;
    std::fs::write(dir.path().join("exp.json"), config).unwrap();
    ok(&tempowave(
        &["detect", "--config", "exp.json", "--input", "bench/edges.tsv", "--out", "r", "--scales", "3", "--omega", "2", "--seed", "5"],
        dir.path(),
    ));
    let rec = json(&dir.path().join("r/result.json"));
    assert_eq!((rec["n_scales"].as_u64(), rec["eta"].as_u64(), rec["seed"].as_u64()), (Some(3), Some(30), Some(5)));
    assert_eq!(rec["weights"], "constant:2");
}

#[test]
fn configs_must_carry_a_seed_and_known_fields() {
    let dir = tempfile::tempdir().unwrap();
    small_granell(dir.path());
    for (name, body) in [("noseed.json", r#"{"detect": {"eta": 30}}"#), ("typo.json", r#"{"seed": 1, "detect": {"etaa": 30}}"#)] {
        std::fs::write(dir.path().join(name), body).unwrap();
        let out = tempowave(&["detect", "--config", name, "--input", "bench/edges.tsv", "--out", "r", "--seed", "2"], dir.path());
        assert_eq!(code(&out), 2, "{name}");
    }
}

#[test]
fn cache_directory_is_filled_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    small_granell(dir.path());
    let args = ["detect", "--input", "bench/edges.tsv", "--scales", "3", "--repetitions", "1", "--eta", "20", "--seed", "0", "--out"];
    let run = |out: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_tempowave"));
        cmd.args(args).arg(out).current_dir(dir.path()).env("TEMPOWAVE_CACHE_DIR", dir.path().join("cache"));
        ok(&cmd.output().unwrap());
    };
    run("a");
    let entries: Vec<_> = std::fs::read_dir(dir.path().join("cache")).unwrap().collect();
    assert_eq!(entries.len(), 1);
    run("b");
    assert_eq!(std::fs::read_dir(dir.path().join("cache")).unwrap().count(), 1);
    let (a, b) = (json(&dir.path().join("a/result.json")), json(&dir.path().join("b/result.json")));
    assert_eq!(without_timestamp(a), without_timestamp(b));
}

#[test]
fn sweep_summarizes_success_rates_over_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "seed": 0,
        "detect": {"n_scales": 4, "eta": 30, "repetitions": 1},
        "benchmark": {"family": "granell", "model": "grow", "n_nodes": 32, "n_layers": 6}
    }"#;
    std::fs::write(dir.path().join("sweep.json"), config).unwrap();
    let stdout = ok(&tempowave(
        &["--threads", "1", "sweep", "--config", "sweep.json", "--realizations", "2", "--first-seed", "5", "--keep", "--out", "s"],
        dir.path(),
    ));
    assert!(stdout.contains("truth") && stdout.contains("(n = 2)"), "{stdout}");
    let summary = json(&dir.path().join("s/summary.json"));
    assert_eq!(summary["seeds"], serde_json::json!([5, 6]));
    assert_eq!(summary["truths"][0]["success_rates"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("s/seed_6/result/result.json").exists());
    let csv = std::fs::read_to_string(dir.path().join("s/summary.csv")).unwrap();
    assert!(csv.starts_with("truth,mean,std,n\ntruth,"));
}
