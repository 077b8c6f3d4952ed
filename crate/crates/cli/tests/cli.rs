//! End-to-end runs of the perclab binary against small configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_perclab")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("perclab-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn run(subcommand: &str, config: &Path, out: &Path) -> Output {
    Command::new(bin())
        .args([
            subcommand,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs")
}

#[test]
fn missing_field_names_the_field_and_exits_2() {
    let dir = tmp_dir("missing-field");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 7

[graph]
family = "free-abelian"
rank = 2

[params]
n = [1]
samples = 10
"#,
    );
    let out = run("en-scan", &config, &dir.join("out"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("missing field `p`"), "stderr: {stderr}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tmp_dir("unknown-key");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 7
mystery = true
"#,
    );
    let out = run("ball", &config, &dir.join("out"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("mystery"), "stderr: {stderr}");
}

#[test]
fn kind_mismatch_is_rejected() {
    let dir = tmp_dir("kind-mismatch");
    let config = write_config(
        &dir,
        r#"
version = 1
kind = "ball"
seed = 7
"#,
    );
    let out = run("locality", &config, &dir.join("out"));
    assert_eq!(out.status.code(), Some(2));
}

const EN_SCAN_CONFIG: &str = r#"
version = 1
kind = "en-scan"
seed = 411

[graph]
family = "free-abelian"
rank = 2

[params]
p = [0.6, 0.7]
n = [1, 2]
samples = 25
plot = "line"
"#;

#[test]
fn en_scan_produces_golden_artifacts() {
    let dir = tmp_dir("en-scan");
    let config = write_config(&dir, EN_SCAN_CONFIG);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let ra = run("en-scan", &config, &out_a);
    assert!(ra.status.success(), "{}", String::from_utf8_lossy(&ra.stderr));
    let rb = run("en-scan", &config, &out_b);
    assert!(rb.status.success());

    let csv_a = std::fs::read_to_string(out_a.join("en-scan.csv")).unwrap();
    let csv_b = std::fs::read_to_string(out_b.join("en-scan.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "repeated runs must be byte-identical");
    assert_eq!(csv_a, include_str!("fixtures/en-scan.golden.csv"));
    assert_eq!(csv_a.lines().count(), 5); // header + 2x2 rows

    let svg_a = std::fs::read_to_string(out_a.join("en-scan.svg")).unwrap();
    let svg_b = std::fs::read_to_string(out_b.join("en-scan.svg")).unwrap();
    assert_eq!(svg_a, svg_b);
    assert_eq!(svg_a, include_str!("fixtures/en-scan.golden.svg"));

    // The manifest records seed, config hash, and artifacts.
    let manifest = std::fs::read_to_string(out_a.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 411"));
    assert!(manifest.contains("config_sha256"));
    assert!(manifest.contains("en-scan.csv"));
}

#[test]
fn ball_fixture_round_trips() {
    let dir = tmp_dir("ball");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 1

[graph]
family = "heisenberg"

[params]
radius = 2
"#,
    );
    let out = dir.join("out");
    let r = run("ball", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(out.join("ball.txt")).unwrap();
    let parsed = perclab_core::graph::parse_edge_list(&text).unwrap();
    assert_eq!(parsed.len(), 17);
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("17 vertices"));
}

#[test]
fn ball_with_custom_generators() {
    let dir = tmp_dir("ball-gens");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 1

[graph]
family = "free-abelian"
rank = 2
generators = [[1, 0], [0, 1], [1, 1]]

[params]
radius = 1
"#,
    );
    let out = dir.join("out");
    let r = run("ball", &config, &out);
    assert!(r.status.success());
    let text = std::fs::read_to_string(out.join("ball.txt")).unwrap();
    let parsed = perclab_core::graph::parse_edge_list(&text).unwrap();
    assert_eq!(parsed.len(), 7); // identity + six generators after closure
}

#[test]
fn renorm_emits_eta_fixture() {
    let dir = tmp_dir("renorm");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 77

[graph]
family = "free-abelian"
rank = 2

[params]
net = "z2-lattice"
a = 1
c = 1
n = 2
p = 0.95
window_radius = 26
"#,
    );
    let out = dir.join("out");
    let r = run("renorm", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let eta = std::fs::read_to_string(out.join("eta.txt")).unwrap();
    assert!(eta.starts_with("net a 1 b 1 points"));
    assert!(eta.lines().any(|l| l.starts_with("H ") && l.ends_with(" 1")));
    assert!(eta.lines().any(|l| l.starts_with("H ") && l.ends_with(" -")));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("interior blocks open"));
}

#[test]
fn locality_report_matches_the_radius() {
    let dir = tmp_dir("locality");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 1

[graph]
family = "product"
  [[graph.factors]]
  family = "cyclic"
  modulus = 7
  [[graph.factors]]
  family = "cyclic"
  modulus = 7

[graph2]
family = "free-abelian"
rank = 2

[params]
r_max = 8
"#,
    );
    let out = dir.join("out");
    let r = run("locality", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("= 3"), "stdout: {stdout}");
    let csv = std::fs::read_to_string(out.join("locality-report.csv")).unwrap();
    assert!(csv.starts_with("k,ball_size_G,ball_size_H,isomorphic\n"));
    assert!(csv.trim_end().ends_with("4,37,41,false"));
}

#[test]
fn net_command_emits_fixture_and_report() {
    let dir = tmp_dir("net");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 1

[graph]
family = "free-abelian"
rank = 2

[params]
kind = "z2-lattice"
a = 2
window_radius = 20
"#,
    );
    let out = dir.join("out");
    let r = run("net", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report = std::fs::read_to_string(out.join("net-report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next().unwrap(),
        "a,b,n_points,max_degree,separated,dense,violations"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("2,2,"));
    assert!(row.contains("true,true,0"));
    let fixture = std::fs::read_to_string(out.join("net.txt")).unwrap();
    assert!(perclab_core::nets::parse_net_fixture(&fixture).is_ok());
}

#[test]
fn couple_reports_equal_sizes() {
    let dir = tmp_dir("couple");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 2024

[graph]
family = "free-abelian"
rank = 2

[graph2]
family = "free-abelian"
rank = 1

[params]
lift = "coordinate-projection"
keep = [0]
p = 0.5
max_steps = 60
horizon = 4
"#,
    );
    let out = dir.join("out");
    let r = run("couple", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("couple.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,base_open,base_closed,lifted_open,lifted_closed,sizes_equal"
    );
    for line in lines {
        assert!(line.ends_with("true"), "row without equal sizes: {line}");
    }
}

#[test]
fn dominate_emits_expected_verdicts() {
    let dir = tmp_dir("dominate");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 5

[params]
k = 1
d_max = 4
adversaries = ["product", "fully-correlated"]
graphs = ["edge"]
marginals = ["3/4", "9/10", "15/16"]
"#,
    );
    let out = dir.join("out");
    let r = run("dominate", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("q threshold = 15/16"), "stdout: {stdout}");
    let csv = std::fs::read_to_string(out.join("dominate.csv")).unwrap();
    assert!(csv.starts_with("graph,spec,k_cert,marginal,dominates_3_4\n"));
    // fully-correlated at 0.9 does not dominate; at 15/16 it does
    assert!(csv.contains("edge,fully-correlated,true,0.900000,false"));
    assert!(csv.contains("edge,fully-correlated,true,0.937500,true"));
    assert!(csv.contains("edge,product,true,0.750000,true"));
}

#[test]
fn pc_estimate_runs_on_the_line() {
    let dir = tmp_dir("pc");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 9

[graph]
family = "free-abelian"
rank = 1

[params]
trials = 60
region_scale = 12
plot = "line"
"#,
    );
    let out = dir.join("out");
    let r = run("pc-estimate", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("pc-estimate.csv")).unwrap();
    assert!(csv.starts_with("graph,region_scale,trials,p_c_hat,ci_lo,ci_hi,seed\n"));
    assert!(out.join("pc-curve.svg").exists());
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tmp_dir("pipeline");
    let config = write_config(
        &dir,
        r#"
version = 1
kind = "pipeline"
seed = 31415

[graph]
family = "free-abelian"
rank = 2

[params]
p = 0.8
q = 0.9
n_candidates = [2, 4]
samples = 60
interior_radius = 8
"#,
    );
    let out = dir.join("out");
    let r = run("pipeline", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stages = std::fs::read_to_string(out.join("pipeline.csv")).unwrap();
    assert!(stages.starts_with("stage,status,detail\n"));
    for want in [
        "scale-selection,true",
        "net-certificates,true",
        "renormalize,true",
        "independence-radius,true",
        "gluing,true",
        "eta-percolation,true",
    ] {
        assert!(stages.contains(want), "missing stage: {want}\n{stages}");
    }
    assert!(out.join("eta.txt").exists());
}

#[test]
fn en_scan_grid_shape() {
    let dir = tmp_dir("en-scan-grid");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 5150

[graph]
family = "free-abelian"
rank = 2

[params]
p = [0.60, 0.65, 0.70]
n = [4, 8, 12, 16]
samples = 5
"#,
    );
    let out = dir.join("out");
    let r = run("en-scan", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.join("en-scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13); // header + 3x4 rows
}

#[test]
fn pipeline_selects_a_scale_at_high_threshold() {
    let dir = tmp_dir("pipeline-q99");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 271828

[graph]
family = "free-abelian"
rank = 2

[params]
p = 0.70
q = 0.99
n_candidates = [8, 12]
samples = 150
interior_radius = 12
"#,
    );
    let out = dir.join("out");
    let r = run("pipeline", &config, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("scale-selection: ok"), "stdout: {stdout}");
    assert!(out.join("eta.txt").exists());
    let stages = std::fs::read_to_string(out.join("pipeline.csv")).unwrap();
    assert!(stages.contains("independence-radius,true"));
}

#[test]
fn pipeline_withholds_conclusions_when_no_scale_qualifies() {
    let dir = tmp_dir("pipeline-refuse");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 31415

[graph]
family = "free-abelian"
rank = 2

[params]
p = 0.65
q = 1.01
n_candidates = [2]
samples = 40
interior_radius = 8
"#,
    );
    let out = dir.join("out");
    let r = run("pipeline", &config, &out);
    assert_eq!(r.status.code(), Some(1));
    let stages = std::fs::read_to_string(out.join("pipeline.csv")).unwrap();
    assert!(stages.contains("scale-selection,false"));
    assert!(!stages.contains("eta-percolation,true"));
}

#[test]
fn seed_env_override_changes_the_run() {
    let dir = tmp_dir("env-override");
    let config = write_config(
        &dir,
        r#"
version = 1
seed = 1

[graph]
family = "free-abelian"
rank = 2

[params]
p = [0.6]
n = [1]
samples = 30
"#,
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let ra = run("en-scan", &config, &out_a);
    assert!(ra.status.success());
    let rb = Command::new(bin())
        .args([
            "en-scan",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_b.to_str().unwrap(),
        ])
        .env("PERCLAB_SEED", "2")
        .output()
        .unwrap();
    assert!(rb.status.success());
    let ma = std::fs::read_to_string(out_a.join("manifest.toml")).unwrap();
    let mb = std::fs::read_to_string(out_b.join("manifest.toml")).unwrap();
    assert!(ma.contains("seed = 1"));
    assert!(mb.contains("seed = 2"));
}
