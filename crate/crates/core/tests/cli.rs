use std::collections::BTreeSet;
use std::path::Path;

use henlab::cli::{dispatch, read_csv, write_csv, CurveRow, ManifoldRow, OrbitRecord, PortraitRow};

fn run(out: &Path, args: &str) -> i32 {
    let mut argv = vec!["henlab".to_string()];
    argv.extend(args.split_whitespace().map(str::to_string));
    argv.push("--out".into());
    argv.push(out.display().to_string());
    dispatch(argv)
}

fn bytes(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn reemit<R>(path: &Path)
where
    R: serde::Serialize + for<'de> serde::Deserialize<'de> + henlab::cli::Schema,
{
    let raw = bytes(path);
    let rows: Vec<R> = read_csv(raw.as_slice()).unwrap();
    let mut again = Vec::new();
    write_csv(&mut again, &rows).unwrap();
    assert_eq!(raw, again, "{}", path.display());
}

#[test]
fn portrait_is_deterministic_and_round_trips() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let code = run(d.path(), "portrait --map qr --d -1 --eps 0.3 --m1 -0.364 --m2 -0.5 --nx 20 --ny 20 --iters 100 --direction both --seed 3");
        assert_eq!(code, 0);
    }
    for name in ["portrait_forward.csv", "portrait_backward.csv"] {
        let a = bytes(&dirs[0].path().join(name));
        assert_eq!(a, bytes(&dirs[1].path().join(name)));
        reemit::<PortraitRow>(&dirs[0].path().join(name));
    }
    let log = std::fs::read_to_string(dirs[0].path().join("run.log")).unwrap();
    assert!(log.contains("forward/backward mirror check") && log.contains(": pass"), "{log}");
}

#[test]
fn conservative_portrait_logs_a_passing_symmetry_check() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "portrait --d +1 --m2 -1.25 --nx 30 --ny 30 --iters 300 --x-min -1.5 --x-max 1.5 --y-min -1.5 --y-max 1.5"), 0);
    let log = std::fs::read_to_string(d.path().join("run.log")).unwrap();
    let line = log.lines().find(|l| l.starts_with("h-symmetry check")).expect("symmetry line");
    assert!(line.ends_with("pass"), "{line}");
}

#[test]
fn orbits_json_follows_the_schema() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "orbits --q 3 --d +1 --m1 0.03 --m2 -1.25 --nx 101 --ny 101"), 0);
    let text = std::fs::read_to_string(d.path().join("orbits.json")).unwrap();
    let orbits: Vec<OrbitRecord> = serde_json::from_str(&text).unwrap();
    assert_eq!(orbits.len(), 4);
    for o in &orbits {
        assert_eq!(o.points.len(), 3);
        assert!(o.residual < 1e-10);
        assert!((o.jacobian - 1.0).abs() < 1e-12);
    }
    assert_eq!(henlab::cli::to_json(&orbits).unwrap(), text);
}

#[test]
fn curve_sweep_round_trips() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "curve --kind pd1 --d -1 --m2-min -2 --m2-max 3 --n 40"), 0);
    let path = d.path().join("curve.csv");
    let rows: Vec<CurveRow> = read_csv(bytes(&path).as_slice()).unwrap();
    assert!(!rows.is_empty() && rows.iter().all(|r| r.curve_id == "PD1"));
    reemit::<CurveRow>(&path);
}

#[test]
fn manifold_branches_round_trip() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "manifold --q 1 --px 0 --py 0 --m2 3 --budget 2"), 0);
    let path = d.path().join("manifold.csv");
    let rows: Vec<ManifoldRow> = read_csv(bytes(&path).as_slice()).unwrap();
    let branches: BTreeSet<(String, i8)> = rows.iter().map(|r| (r.side.clone(), r.branch_sign)).collect();
    assert_eq!(branches.len(), 4);
    reemit::<ManifoldRow>(&path);
}

#[test]
fn numerical_failure_exits_two() {
    let d = tempfile::tempdir().unwrap();
    // no period-3 orbit near this seed: Newton diverges
    assert_eq!(run(d.path(), "manifold --q 3 --px 5 --py 5 --d +1 --m2 -1.25"), 2);
    assert_eq!(run(d.path(), "orbits --q 3 --d 2"), 1);
}

#[test]
fn conservative_diagram_has_five_curves() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "diagram --d +1"), 0);
    let rows: Vec<CurveRow> = read_csv(bytes(&d.path().join("diagram.csv")).as_slice()).unwrap();
    let ids: BTreeSet<&str> = rows.iter().map(|r| r.curve_id.as_str()).collect();
    assert_eq!(ids, BTreeSet::from(["L13", "P1", "P3", "PD1", "PF3"]));
}

#[test]
fn perturbed_diagram_is_not_mirror_symmetric() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(run(d.path(), "diagram --map qr --d +1 --eps 0.05"), 0);
    let rows: Vec<CurveRow> = read_csv(bytes(&d.path().join("diagram.csv")).as_slice()).unwrap();
    let l13: Vec<&CurveRow> = rows.iter().filter(|r| r.curve_id == "L13").collect();
    assert!(!l13.is_empty());
    let mirrored = |r: &CurveRow| {
        l13.iter().map(|s| (s.m1 + r.m1).hypot(s.m2 - r.m2)).fold(f64::INFINITY, f64::min)
    };
    let worst = l13.iter().map(|r| mirrored(r)).fold(0.0, f64::max);
    assert!(worst > 1e-2, "L13 is mirror symmetric to {worst}");
}

#[test]
fn config_file_feeds_flags_and_diagram_jobs() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "[diagram]\nd = +1\nno-defaults = true\n\n[curve.l13]\nkind = l13\nd = +1\nn = 25\n").unwrap();
    assert_eq!(run(d.path(), &format!("diagram --config {}", cfg.display())), 0);
    let rows: Vec<CurveRow> = read_csv(bytes(&d.path().join("diagram.csv")).as_slice()).unwrap();
    assert!(!rows.is_empty() && rows.iter().all(|r| r.curve_id == "L13"));
}
