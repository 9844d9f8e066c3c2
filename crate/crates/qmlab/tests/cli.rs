//! End-to-end runs of the `qmlab` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qmlab::{read_table, Format, ResultTable};

fn qmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmlab")).args(args).output().expect("binary runs")
}

fn qmlab_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmlab")).args(args).env(key, value).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn magic_field_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("magic.json");
    let o = qmlab(&["magic-field", "--bracket", "0.5", "6", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = String::from_utf8(o.stdout).unwrap();
    assert_eq!(summary.lines().count(), 1);
    let t = read_table(&out, Format::Json).unwrap();
    let bz = t.column("bz").unwrap()[0];
    assert!((bz - 3.22895).abs() < 1e-3, "{bz}");
    assert!((t.metadata.results["offset"] + 0.00449737).abs() < 1e-5);
    assert_eq!(t.metadata.experiment, "magic-field");
    assert_eq!(t.metadata.parameters["bracket"], "0.5,6");
    assert!((t.metadata.constants["mu_b_mhz_per_g"] - 1.3996255481168427).abs() < 1e-15);
    // The JSON form round-trips through the table type.
    let again = ResultTable::from_json(&t.to_json().unwrap()).unwrap();
    assert_eq!(again, t);
}

#[test]
fn ising_scan_csv_has_a_gap_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ising.csv");
    let o = qmlab(&["ising-scan", "--n", "6", "--s", "0.5", "--b", "-3:3:0.25", "--m", "2", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("b,e0,e1,gap,"));
    assert!(!text.contains('\r'));
    let t = ResultTable::from_csv(&text).unwrap();
    assert_eq!(t.rows.len(), 25);
    let b = t.column("b").unwrap();
    let gap = t.column("gap").unwrap();
    assert_eq!(b[0], -3.0);
    assert_eq!(b[24], 3.0);
    assert!(gap[12].abs() < 1e-9);
    assert!(gap[0] > 0.5);
}

#[test]
fn sweeps_do_not_depend_on_the_thread_count() {
    let args = ["ising-scan", "--n", "6", "--b", "-1:1:0.125"];
    let one = qmlab_env(&args, "QMLAB_THREADS", "1");
    let four = qmlab_env(&args, "QMLAB_THREADS", "4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&qmlab_env(&args, "QMLAB_THREADS", "zero")), 2);
}

#[test]
fn pimc_runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name).join("ho.csv");
        let o = qmlab_env(
            &["pimc-ho", "--zeta", "1", "--slices", "20", "--sweeps", "100000", "--seed", "7", "--out", path_str(&out)],
            "QMLAB_THREADS",
            threads,
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "1");
    let b = run("b", "2");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let stats = |p: &Path| fs::read(p.with_file_name("ho_stats.json")).unwrap();
    assert_eq!(stats(&a), stats(&b));

    let hist = read_table(&a, Format::Csv).unwrap();
    assert_eq!(hist.columns, ["bin_center", "density", "analytic_density"]);
    let s = read_table(&a.with_file_name("ho_stats.json"), Format::Json).unwrap();
    assert_eq!(s.metadata.seed, 7);
    assert!(s.metadata.results["fit_p_value"] > 0.01);
    assert!((s.metadata.results["second_moment"] / s.metadata.results["exact_second_moment"] - 1.0).abs() < 0.05);
    assert!(s.metadata.wall_time_s.is_none());
}

#[test]
fn pimc_chains_and_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ring.csv");
    let o = qmlab(&[
        "pimc-ho", "--zeta", "2", "--slices", "8", "--sweeps", "120", "--chains", "3", "--burn_in", "100", "--samples", "1",
        "--out", path_str(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let samples = read_table(&dir.path().join("ring_samples.csv"), Format::Csv).unwrap();
    assert_eq!(samples.columns, ["sweep", "bead", "value"]);
    assert_eq!(samples.rows.len(), 3 * 20 * 8);
    let stats = read_table(&dir.path().join("ring_stats.json"), Format::Json).unwrap();
    assert_eq!(stats.rows.len(), 3);
    // Too few rings for the goodness-of-fit test: it is skipped.
    assert!(!stats.metadata.results.contains_key("fit_p_value"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# step well\nexperiment = stepwell\nomega = 2.5\nn_max = 8:12:2\nformat = json\n").unwrap();
    let out = dir.path().join("sw.out");
    let o = qmlab(&["stepwell", "--config", path_str(&cfg), "--set", "n_max=8:10:2", "--out", path_str(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&out, Format::Json).unwrap();
    assert_eq!(t.metadata.parameters["omega"], "2.5");
    assert_eq!(t.column("n_max").unwrap(), [8.0, 10.0]);
    // A dedicated flag wins over --set.
    let o = qmlab(&["stepwell", "--set", "omega=3", "--omega", "2", "--n_max", "8", "--format", "json"]);
    let t = ResultTable::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(t.metadata.parameters["omega"], "2");

    fs::write(&cfg, "omega = 2\ntypo = 1\n").unwrap();
    let o = qmlab(&["stepwell", "--config", path_str(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'typo'"));
    fs::write(&cfg, "experiment = twobody\n").unwrap();
    assert_eq!(code(&qmlab(&["stepwell", "--config", path_str(&cfg)])), 2);
}

#[test]
fn configuration_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["no-such-experiment"],
        &[],
        &["pimc-ho", "--zeta", "0"],
        &["pimc-ho", "--zeta", "-1"],
        &["pimc-ho", "--slices", "1"],
        &["stepwell", "--n_max", "-8"],
        &["twobody", "--n", "-3"],
        &["ising-scan", "--b", "3:-3:0.1"],
        &["ising-scan", "--b", "-3:3:0"],
        &["ising-scan", "--s", "0.3"],
        &["ising-scan", "--coupling", "potts"],
        &["magic-field", "--bracket", "6", "1"],
        &["magic-field", "--upper_f", "3"],
        &["stepwell", "--omega", "1"],
        &["mc-demo", "--set", "samples"],
        &["mc-demo", "--seed", "-4"],
        &["gpe-ground"],
        &["gpe-ground", "2d"],
    ];
    for args in cases {
        let o = qmlab(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    let o = qmlab(&["no-such-experiment"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn non_convergence_exits_3() {
    let o = qmlab(&["gpe-ground", "1d", "--max_iter", "5"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let o = qmlab(&["magic-field", "--bracket", "4", "6"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn help_exits_0() {
    let o = qmlab(&["--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "hyperfine-levels",
        "magic-field",
        "ising-scan",
        "stepwell",
        "dynamics-1d",
        "gpe-ground",
        "twobody",
        "spinspace",
        "pimc-ho",
        "mc-demo",
    ] {
        assert!(text.contains(name), "{name}");
    }
    assert_eq!(code(&qmlab(&["pimc-ho", "--help"])), 0);
}

#[test]
fn wall_time_only_when_requested() {
    let o = qmlab(&["mc-demo", "--samples", "100", "--format", "json", "--record-time"]);
    assert_eq!(code(&o), 0);
    let t = ResultTable::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert!(t.metadata.wall_time_s.unwrap() >= 0.0);
    let a = qmlab(&["mc-demo", "--samples", "100", "--seed", "3"]);
    let b = qmlab(&["mc-demo", "--samples", "100", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn every_experiment_runs_on_small_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&[&str], &str)] = &[
        (&["hyperfine-levels", "--b", "0:20:5"], "e_f2_m2"),
        (&["dynamics-1d", "--n", "32", "--steps", "16"], "x_var"),
        (&["gpe-ground", "1d", "--n", "16", "--g", "5", "--db", "1e-3", "--tol", "1e-8"], "density"),
        (&["gpe-ground", "3d", "--n", "9", "--n_atoms", "1", "--sigma", "0.1", "--tol", "1e-5"], "rho_z"),
        (&["twobody", "--n", "6", "--g", "-1:1:1", "--interaction", "coulomb"], "exchange_parity"),
        (&["spinspace", "--n", "8", "--omega", "50", "--f", "300", "--bx", "10"], "spin_profile"),
        (&["mc-demo", "--samples", "200", "--chain", "500", "--burn_in", "50"], "z_score"),
    ];
    for (args, column) in cases {
        let out = dir.path().join("t.csv");
        let mut full = args.to_vec();
        full.extend(["--out", path_str(&out)]);
        let o = qmlab(&full);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let t = read_table(&out, Format::Csv).unwrap();
        assert!(t.column_index(column).is_some(), "{args:?}");
        assert!(!t.rows.is_empty());
    }
}
