use std::path::Path;
use std::process::{Command, Output};

use twoqubit::dynamics::{build_liouvillian, evolve};
use twoqubit::experiments::{linspace, InitialStateSpec};
use twoqubit::model::SystemParams;

fn twoqubit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twoqubit")).args(args).env("NO_COLOR", "1").output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn evolve_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = twoqubit(&["evolve", "--initial", "twobit:p=0.3", "--t-max", "100", "--samples", "51", "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let args = ["sweep", "--vary", "t1t2", "--grid", "T1=0:40:9", "--grid", "T2=0:40:9", "--alpha1", "0.05", "--alpha2", "0.005"];
    let first = twoqubit(&args);
    let second = twoqubit(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "T1_mK,T2_mK,concurrence");
    assert_eq!(text.lines().count(), 1 + 81);
}

#[test]
fn evolve_csv_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = twoqubit(&[
        "evolve", "--initial", "onebit:p=0.25", "--t1-mk", "15", "--t2-mk", "5", "--t-max", "200", "--samples", "41", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["t_ns", "pop_a", "pop_b", "pop_c", "pop_d", "concurrence"]);

    let p = SystemParams::preset().with_temperatures(15.0, 5.0);
    let l = build_liouvillian(&p).unwrap();
    let rho0 = InitialStateSpec::Onebit(0.25).to_density(l.eigensystem()).unwrap();
    let traj = evolve(&l, &rho0, &linspace(0.0, 200.0, 41)).unwrap();
    assert_eq!(rows.len(), traj.len());
    for (n, row) in rows.iter().enumerate() {
        let want = [&[traj.times[n]][..], &traj.populations[n], &[traj.concurrence[n]]].concat();
        for (got, want) in row.iter().zip(&want) {
            assert!((got - want).abs() <= 1e-11 * want.abs().max(1e-300) + 1e-300, "{got} vs {want}");
        }
    }
}

#[test]
fn full_state_columns() {
    let out = twoqubit(&["evolve", "--initial", "eigen:d", "--t-max", "10", "--samples", "3", "--full-state"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 6 + 20);
    assert_eq!(&header[6..8], ["re_rho_00", "im_rho_00"]);
    assert_eq!(header[25], "im_rho_33");
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    // |d> = s|00> + c|11>, so the initial rho_03 is real and positive
    let re03 = first[header.iter().position(|h| *h == "re_rho_03").unwrap()];
    let trace: f64 = ["re_rho_00", "re_rho_11", "re_rho_22", "re_rho_33"]
        .iter()
        .map(|h| first[header.iter().position(|x| x == h).unwrap()])
        .sum();
    assert!(re03 > 0.0);
    assert!((trace - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes_and_diagnostics() {
    let usage = twoqubit(&["evolve", "--initial", "onebit:p=0.5x"]);
    assert_eq!(usage.status.code(), Some(2));
    let err = String::from_utf8(usage.stderr).unwrap();
    assert!(err.contains("--initial"), "{err}");
    assert!(!err.contains('\u{1b}'));

    assert_eq!(twoqubit(&["sweep", "--vary", "nothing"]).status.code(), Some(2));
    assert_eq!(twoqubit(&["spectrum", "--omega1", "-1"]).status.code(), Some(1));
    assert_eq!(twoqubit(&["steady", "--alpha1", "0", "--alpha2", "0"]).status.code(), Some(1));
    assert_eq!(twoqubit(&["evolve", "--out", "/nonexistent-dir/x.csv", "--samples", "2"]).status.code(), Some(1));
    assert_eq!(twoqubit(&["--version"]).status.code(), Some(0));
}

#[test]
fn steady_warm_baths() {
    let out = twoqubit(&["steady", "--t1-mk", "20", "--t2-mk", "20"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((row[4] - 0.064549).abs() < 1e-5);
    assert!((row[..4].iter().sum::<f64>() - 1.0).abs() < 1e-11);
}
