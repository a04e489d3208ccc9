use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nnfd::shallow_net::ShallowNet;

fn nnfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnfd")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(
        &path,
        format!(
            "seed = 4\npreset = \"example1\"\ngrids = [32, 64, 128]\n{extra}\n[network]\nwidth = 10\nsamples = 40\n[lm]\nmax_epochs = 30\n"
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn converge_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let mut tables = vec![];
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = nnfd(&["converge", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        tables.push(fs::read(out.join("table.csv")).unwrap());
        for f in ["timings.csv", "net.txt", "loss.csv"] {
            assert!(out.join(f).exists(), "{f}");
        }
    }
    assert_eq!(tables[0], tables[1]);
    let text = String::from_utf8(tables[0].clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("n,h,err_u,err_grad,order_u,order_grad,train_loss"));
    assert!(lines[1].starts_with("32,6.2500000000000000e-02,"));
    let net = ShallowNet::load(dir.path().join("a/net.txt")).unwrap();
    assert_eq!((net.width(), net.seed()), (10, 4));
}

#[test]
fn seed_flag_overrides_and_changes_the_net() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    for seed in ["4", "5"] {
        let out = dir.path().join(seed);
        let o = nnfd(&["train", "--config", &cfg, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let a = fs::read_to_string(dir.path().join("4/net.txt")).unwrap();
    let b = fs::read_to_string(dir.path().join("5/net.txt")).unwrap();
    assert_ne!(a, b);
    let loss = fs::read_to_string(dir.path().join("4/loss.csv")).unwrap();
    assert!(loss.starts_with("epoch,loss\n0,"));
}

#[test]
fn successive_mode_drops_the_finest_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "mode = \"successive\"\ndump_fields = true");
    let out = dir.path().join("o");
    let o = nnfd(&["converge", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("table.csv")).unwrap();
    let ns: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ns, ["32", "64"]);
    let fields = fs::read_to_string(out.join("fields/poisson_n32.csv")).unwrap();
    assert!(fields.starts_with("x,y,u,v,w\n"));
    assert_eq!(fields.lines().count(), 1 + 33 * 33);
}

#[test]
fn retrain_writes_one_net_per_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = dir.path().join("o");
    let o = nnfd(&["converge", "--config", &cfg, "--retrain", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    for n in [32, 64, 128] {
        assert!(out.join(format!("net_n{n}.txt")).exists());
    }
}

#[test]
fn solve_with_saved_net() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), "");
    let out = dir.path().join("o");
    assert!(nnfd(&["train", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    let net = out.join("net.txt");
    let o = nnfd(&["solve", "--config", &cfg, "--n", "32", "--net", net.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("err_u ") && stdout.contains("err_grad "));
    assert!(out.join("fields/poisson_n32.csv").exists());
}

#[test]
fn validate_passes() {
    let o = nnfd(&["validate"]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().count() >= 10);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn bad_configs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "preset = \"example1\"\n").unwrap();
    let o = nnfd(&["converge", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    let o = nnfd(&["converge"]);
    assert!(!o.status.success());
    let o = nnfd(&["stokes", "--preset", "example1"]);
    assert!(!o.status.success());
}
