use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn aggrekin(args: &[&str], out: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_aggrekin"));
    cmd.args(args).env_remove("AGGREKIN_OUTPUT_DIR").env("RUST_LOG", "error");
    if !out.as_os_str().is_empty() {
        cmd.arg(format!("--output_dir={}", out.display()));
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str], out: &Path) {
    let o = aggrekin(args, out);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
}

/// Header and data rows, without the metadata block.
fn csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn summary(dir: &Path) -> HashMap<String, String> {
    let (header, rows) = csv(&dir.join("summary.csv"));
    assert_eq!(header, "key,value");
    rows.into_iter().map(|r| (r[0].clone(), r[1].clone())).collect()
}

fn num(map: &HashMap<String, String>, key: &str) -> f64 {
    map[key].parse().unwrap()
}

#[test]
fn lists_scenarios() {
    let o = aggrekin(&["scenarios"], Path::new(""));
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["two_gauss", "three_gauss", "asymmetric", "single_dirac"] {
        assert!(text.contains(name));
    }
}

#[test]
fn single_dirac_stays_put() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["aggregate", "--scenario=single_dirac", "--dx=0.01"], dir.path());
    let (header, events) = csv(&dir.path().join("events.csv"));
    assert_eq!(header, "t,left_index,right_index,position,mass");
    assert!(events.is_empty());
    let (header, rows) = csv(&dir.path().join("aggregates.csv"));
    assert_eq!(header, "t,index,position,mass");
    assert!(rows.iter().all(|r| r[2] == "0" && r[3] == "1"));
    let s = summary(dir.path());
    assert_eq!(s["n_final"], "1");
    assert_eq!(num(&s, "com_final"), 0.0);
}

#[test]
fn two_gauss_collapses_near_center() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["aggregate", "--scenario=two_gauss", "--dx=0.005"], dir.path());
    let s = summary(dir.path());
    assert_eq!(s["n_final"], "1");
    assert!(num(&s, "com_final").abs() < 0.05);
    assert!((num(&s, "total_mass_final") / num(&s, "total_mass_initial") - 1.0).abs() < 1e-12);
    assert!(num(&s, "t_collapse") > 0.0);
    assert!(num(&s, "max_one_sided_violation") <= 1e-6);
    assert!(num(&s, "max_osl_excess") <= 1e-6);
}

#[test]
fn asymmetric_center_of_mass_moves() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["aggregate", "--scenario=asymmetric", "--dx=0.005"], dir.path());
    let s = summary(dir.path());
    assert!((num(&s, "com_final") - num(&s, "com_initial")).abs() > 0.01);
    ok(
        &["aggregate", "--scenario=asymmetric", "--dx=0.005", "--mode=identity", "--merge_rule=center_of_mass"],
        dir.path(),
    );
    let s = summary(dir.path());
    assert!((num(&s, "com_final") - num(&s, "com_initial")).abs() < 1e-8);
}

#[test]
fn violations_exit_nonzero_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    for (args, key) in [
        (vec!["kinetic", "--dx=0.01", "--dt=0.02"], "`dt`"),
        (vec!["aggregate", "--x_min=-3"], "`x_min`"),
        (vec!["aggregate", "--dx=0"], "`dx`"),
        (vec!["aggregate", "--t_end=-1"], "`t_end`"),
        (vec!["study", "--mode=identity"], "`mode`"),
    ] {
        let o = aggrekin(&args, dir.path());
        assert!(!o.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(key), "{args:?}: {err}");
    }
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "dxx = 0.1\n").unwrap();
    let o = aggrekin(&["aggregate", &format!("--config={}", bad.display())], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("dxx"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let read_all = |d: &Path| {
        let mut files: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        files.into_iter().map(|p| (p.clone(), fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    for sub in ["aggregate", "kinetic", "study"] {
        let args = [sub, "--scenario=three_gauss", "--dx=0.01", "--t_end=0.5", "--emit_svg=true", "--eps_list=0.2,0.1"];
        ok(&args, dir.path());
        let first = read_all(dir.path());
        ok(&args, dir.path());
        assert_eq!(first, read_all(dir.path()), "{sub}");
    }
}

#[test]
fn metadata_echoes_the_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "scenario = \"two_gauss\"\ndx = 0.01\nt_end = 0.2\nlambda = 0.5\n").unwrap();
    ok(&["aggregate", &format!("--config={}", cfg.display()), "--t_end=0.1"], dir.path());
    let text = fs::read_to_string(dir.path().join("aggregates.csv")).unwrap();
    for line in ["# scenario=two_gauss", "# dx=0.01", "# t_end=0.1", "# lambda=0.5", "# alpha=0.1", "# mode=smooth"] {
        assert!(text.lines().any(|l| l == line), "missing {line}");
    }
    let s = summary(dir.path());
    assert_eq!(s["steps"], "100");
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_aggrekin"))
        .args(["aggregate", "--scenario=single_dirac", "--dx=0.01", "--t_end=0.01"])
        .env("AGGREKIN_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn kinetic_fields_and_mass() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["kinetic", "--scenario=two_gauss", "--dx=0.01", "--t_end=0.2", "--sample_every=10", "--eps_list=0.1"], dir.path());
    let (header, rows) = csv(&dir.path().join("fields.csv"));
    assert_eq!(header, "t,x,rho,S,dS,J");
    let times: std::collections::BTreeSet<_> = rows.iter().map(|r| r[0].clone()).collect();
    assert_eq!(times.len(), 3);
    let s = summary(dir.path());
    assert!(num(&s, "relative_mass_error") <= 1e-10);
    assert_eq!(s["nonnegative"], "true");
    assert_eq!(s["eps"], "0.1");
}

#[test]
fn study_rows() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["study", "--scenario=custom", "--gaussians=0:0:20", "--dx=0.01", "--t_end=0.1"], dir.path());
    let (header, rows) = csv(&dir.path().join("study.csv"));
    assert_eq!(header, "eps,W1,flux_gap");
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == "0"));

    ok(&["study", "--dx=0.01", "--t_end=0.2", "--eps_list=0.1"], dir.path());
    let (_, rows) = csv(&dir.path().join("study.csv"));
    assert_eq!(rows.len(), 1);

    ok(&["study", "--dx=0.01", "--t_end=0.2", "--eps_list=0.05,0.2,0.1"], dir.path());
    let (_, rows) = csv(&dir.path().join("study.csv"));
    let eps: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(eps, [0.2, 0.1, 0.05]);
    let w1: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(w1[0] > w1[1] && w1[1] > w1[2], "{w1:?}");
}

#[test]
fn random_scenario_uses_seed() {
    let dir = tempfile::tempdir().unwrap();
    let first = |seed: &str| {
        ok(&["aggregate", "--scenario=random", &format!("--seed={seed}"), "--t_end=0.01"], dir.path());
        let (_, rows) = csv(&dir.path().join("aggregates.csv"));
        rows.into_iter().filter(|r| r[0] == "0").collect::<Vec<_>>()
    };
    assert_eq!(first("7"), first("7"));
    assert_ne!(first("7"), first("8"));
}
