use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use netdim_core::constructors::cube_gap_volume;

fn netdim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdim")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn volume_prints_the_formula_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = netdim(dir.path(), &["volume", "--d", "10", "--r", "0.1"]);
    assert!(out.status.success());
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert_eq!(v, cube_gap_volume(10, 0.1).unwrap());
    // No output file, so the manifest goes to stderr.
    assert!(stderr(&out).contains("subcommand=volume"));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = |o: &'static str| ["gen", "--dist", "cube", "--d", "3", "--n", "10", "--seed", "1", "--output", o];
    assert!(netdim(dir.path(), &args("a.csv")).status.success());
    assert!(netdim(dir.path(), &args("b.csv")).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 10);
}

#[test]
fn disconnected_input_exits_1_naming_components() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tri.txt"), "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n").unwrap();
    let out = netdim(dir.path(), &["estimate-unweighted", "--input", "tri.txt", "--s-max", "3", "--output", "o.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("2 connected components"), "{}", stderr(&out));

    let out = netdim(
        dir.path(),
        &["spectrum", "--input", "tri.txt", "--giant-component", "--output", "s.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read_to_string(dir.path().join("s.csv.nodes")).unwrap(), "0\n1\n2\n");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(netdim(dir.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(netdim(dir.path(), &["volume", "--d", "10"]).status.code(), Some(2));
    assert_eq!(netdim(dir.path(), &["volume", "--d", "x", "--r", "0.1"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_netdim"))
        .args(["volume", "--d", "10", "--r", "0.1"])
        .env("NETDIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(netdim(dir.path(), &["volume", "--d", "10", "--r", "0.7"]).status.code(), Some(1));
    assert_eq!(netdim(dir.path(), &["knn", "--input", "missing.csv", "--output", "g.txt"]).status.code(), Some(1));
}

fn points_and_graph(dir: &Path) {
    assert!(netdim(dir, &["gen", "--dist", "gaussian", "--d", "3", "--n", "200", "--seed", "2", "--output", "p.csv"])
        .status
        .success());
    assert!(netdim(dir, &["knn", "--input", "p.csv", "--k", "10", "--output", "g.txt"]).status.success());
}

#[test]
fn sweep_without_plateau_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    points_and_graph(dir.path());
    // A plateau of 8 records within 0.1% is out of reach.
    let out = netdim(
        dir.path(),
        &["estimate-unweighted", "--input", "g.txt", "--s-max", "10", "--plateau-len", "8", "--plateau-eps", "0.001", "--output", "sw.csv"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("chosen_dimension=none"));
    let csv = fs::read_to_string(dir.path().join("sw.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
}

#[test]
fn stdout_is_one_line_and_manifest_is_sorted() {
    let dir = tempfile::tempdir().unwrap();
    points_and_graph(dir.path());
    let out = netdim(dir.path(), &["estimate-weighted", "--input", "p.csv", "--output", "dc.csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
    let summary = fs::read_to_string(dir.path().join("dc.csv.summary")).unwrap();
    assert!(summary.contains("d_star=") && summary.contains("window_lo="));

    let manifest = fs::read_to_string(dir.path().join("g.txt.manifest")).unwrap();
    let keys: Vec<&str> = manifest.lines().map(|l| l.split_once('=').unwrap().0).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(manifest.contains("arg.k=10\n"));
    assert!(manifest.contains("input.input.sha256="));
    assert!(manifest.contains("version="));

    // Defaults are echoed.
    let out = netdim(dir.path(), &["knn", "--input", "p.csv", "--output", "g2.txt"]);
    assert!(out.status.success());
    let manifest = fs::read_to_string(dir.path().join("g2.txt.manifest")).unwrap();
    assert!(manifest.contains("resolved.k=158\n"), "{manifest}");
}

#[test]
fn replay_refuses_changed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    points_and_graph(dir.path());
    fs::write(dir.path().join("p.csv"), "0,0,0\n1,1,1\n2,2,3\n3,3,3\n5,5,5\n").unwrap();
    let out = netdim(dir.path(), &["replay", "--manifest", "g.txt.manifest"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("changed"));
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    points_and_graph(dir.path());
    let run = |threads: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_netdim"))
            .args(["embed", "--input", "g.txt", "--k", "4", "--output", out])
            .current_dir(dir.path())
            .env("NETDIM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read(dir.path().join(out)).unwrap()
    };
    assert_eq!(run("1", "a.csv"), run("3", "b.csv"));
}

#[test]
fn weighted_inputs_and_matrix_formats() {
    let dir = tempfile::tempdir().unwrap();
    // Path graph on 5 nodes with unit similarities, in MatrixMarket form.
    fs::write(
        dir.path().join("w.mtx"),
        "%%MatrixMarket matrix coordinate real symmetric\n5 5 4\n2 1 1\n3 2 1\n4 3 1\n5 4 1\n",
    )
    .unwrap();
    let out = netdim(dir.path(), &["spectrum", "--input", "w.mtx", "--output", "s.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    for (j, v) in values.iter().enumerate() {
        let want = 2.0 - 2.0 * (std::f64::consts::PI * j as f64 / 5.0).cos();
        assert!((v - want).abs() < 1e-10);
    }

    fs::write(dir.path().join("m.csv"), "n=4\n0,1,3,7\n1,0,2,6\n3,2,0,4\n7,6,4,0\n").unwrap();
    let out = netdim(dir.path(), &["nn-hist", "--input", "m.csv", "--bins", "3", "--output", "h.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let h = fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let counts: Vec<usize> = h.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(counts, vec![2, 1, 1]);

    fs::write(dir.path().join("bad.csv"), "n=2\n0,1\n2,0\n").unwrap();
    let out = netdim(dir.path(), &["estimate-weighted", "--input", "bad.csv", "--output", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("(0, 1)"), "{}", stderr(&out));
}
