use std::path::Path;
use std::process::{Command, Output};

use transversal_core::certify::{enumerate_pair_grid, PairGrid, CENTER_RESOLUTION};
use transversal_core::search::{initial_cube_count, Certificate, ConfigEcho, RoundStats};
use transversal_core::{Mode, PruneReason, Verdict, DELTA_FP, TAU};

fn transversal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_transversal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_tuple_regular_pentagon() {
    let o = transversal(&["check-tuple", "0", "2pi/5", "4pi/5", "6pi/5", "8pi/5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("five values: 0.500000000000 0.500000000000"), "{out}");
    assert!(out.contains("signs: + + + + +"), "{out}");
    assert!(out.contains("no prune"), "{out}");
}

#[test]
fn check_tuple_square_has_vanishing_functional() {
    let o = transversal(&["check-tuple", "0", "90", "180", "270", "--degrees"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let f: f64 = out.lines().find_map(|l| l.strip_prefix("F = ")).unwrap().parse().unwrap();
    assert!(f.abs() < 1e-12);
    assert!(out.contains("satisfies T(B, 3)"), "{out}");
}

#[test]
fn check_tuple_clustered_points_hit_large_arc() {
    let o = transversal(&["check-tuple", "0", "0.1", "0.2", "0.3", "0.4", "--r1", "3", "--r2", "1.62"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("LargeArc"));
}

#[test]
fn check_tuple_rejects_wrong_arity_and_unsorted_angles() {
    assert_eq!(transversal(&["check-tuple", "0", "1"]).status.code(), Some(1));
    assert_eq!(transversal(&["check-tuple", "2", "1", "3"]).status.code(), Some(1));
    assert_eq!(transversal(&["check-tuple", "0", "1", "2", "--mode", "grid-b"]).status.code(), Some(1));
}

#[test]
fn verify_lemma15_small_run_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.json");
    let o = transversal(&[
        "verify",
        "--mode",
        "lemma15",
        "--r1",
        "3",
        "--r2",
        "1.70",
        "--n0",
        "60",
        "--depth-cap",
        "4",
        "--audit-cubes",
        "2000",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let c = Certificate::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(c.verdict, Verdict::Empty);
    assert!(c.validate().is_ok());
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 violations"));
}

#[test]
fn verify_depth_cap_exits_two() {
    let o =
        transversal(&["verify", "--mode", "grid-b", "--r1", "1.8", "--r2", "1.65", "--n0", "24", "--depth-cap", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let c = Certificate::from_json(&stdout(&o)).unwrap();
    assert_eq!(c.verdict, Verdict::DepthCapReached);
    assert!(c.survivors.is_some());
}

#[test]
fn resume_rejects_checkpoint_of_other_config() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.json");
    let ck = ck.to_str().unwrap();
    let base = ["verify", "--mode", "grid-b", "--r1", "1.8", "--r2", "1.65", "--n0", "24"];
    let first = transversal(&[&base[..], &["--depth-cap", "2", "--checkpoint", ck]].concat());
    assert_eq!(first.status.code(), Some(2));
    assert!(Path::new(ck).exists());
    let other = transversal(&[
        "verify",
        "--mode",
        "grid-b",
        "--r1",
        "1.8",
        "--r2",
        "1.7",
        "--n0",
        "24",
        "--depth-cap",
        "3",
        "--checkpoint",
        ck,
        "--resume",
    ]);
    assert_eq!(other.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(transversal(&["verify", "--mode", "grid-b", "--r1", "1.8"]).status.code(), Some(1));
    assert_eq!(transversal(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(transversal(&["--help"]).status.code(), Some(0));
}

#[test]
fn region_dump_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = transversal(&[
        "region-dump",
        "0",
        "pi/2",
        "pi",
        "3pi/2",
        "--r1",
        "1.7",
        "--r2",
        "1.65",
        "--eps",
        "0.01",
        "--depth",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.lines().count() > 1);
}

fn synthetic(mode: Mode, r1: f64, r2: f64) -> Certificate {
    let config = ConfigEcho {
        mode,
        r1,
        r2,
        n0: 6,
        depth_cap: 1,
        rho: TAU,
        region_max_depth: 1,
        region_min_half_side: 0.0,
        center_check_n: (mode == Mode::GridC).then_some(CENTER_RESOLUTION),
        delta_fp: DELTA_FP,
        lemma15_large_arc: true,
        cube_budget: 1_000,
    };
    let mut round = RoundStats::new(6);
    round.cubes_in = initial_cube_count(mode.k(), 6);
    round.pruned.insert(PruneReason::LargeArc, round.cubes_in);
    Certificate {
        schema_version: 1,
        config_hash: config.hash(),
        mode,
        r1,
        r2,
        config,
        rounds: vec![round],
        verdict: Verdict::Empty,
        survivors: None,
        wall_seconds: 0.0,
    }
}

fn write_certs(path: &Path, certs: &[Certificate]) {
    std::fs::write(path, serde_json::to_string(certs).unwrap()).unwrap();
}

#[test]
fn report_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let mut certs = vec![synthetic(Mode::Lemma15, 3.0, 1.62)];
    for (r1, r2) in enumerate_pair_grid(&PairGrid::standard(0.015)) {
        certs.push(synthetic(Mode::GridB, r1, r2));
        certs.push(synthetic(Mode::GridC, r1, r2));
    }
    let full = dir.path().join("full.json");
    write_certs(&full, &certs);
    let o = transversal(&["report", full.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("bound: lambda(B, 3) <= 1.645"));

    let partial = dir.path().join("partial.json");
    write_certs(&partial, &certs[..certs.len() - 1]);
    let o = transversal(&["report", partial.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("status: Partial"));

    let mut tampered = certs.clone();
    tampered[1].rounds[0].cubes_in += 1;
    let bad = dir.path().join("bad.json");
    write_certs(&bad, &tampered);
    assert_eq!(transversal(&["report", bad.to_str().unwrap()]).status.code(), Some(1));
}
