use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use poscone::algebra::pauli;
use poscone::convexity::{standard_subspace, SubspaceKind};
use poscone::geometry::{dist, geodesic};
use poscone::io::{self as pio, ElementJson, FactorizationJson, ProjectionJson};
use poscone::random::{random_hermitian, random_invertible, random_positive, random_unitary, rng};
use poscone::{HermitianElement, PositiveElement, TracialAlgebra};
use serde_json::Value;

fn workdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &PathBuf, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn poscone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poscone"))
        .args(args)
        .env_remove("POSCONE_DEFAULT_TOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn herm_file(dir: &PathBuf, name: &str, x: &HermitianElement) -> String {
    write(dir, name, &pio::hermitian_to_json(x).unwrap())
}

#[test]
fn dist_examples() {
    let dir = workdir("dist");
    let m2 = TracialAlgebra::matrix(2);
    let id = herm_file(&dir, "id.json", &HermitianElement::identity(&m2));
    let e = std::f64::consts::E;
    let d = herm_file(
        &dir,
        "d.json",
        &HermitianElement::diagonal(&m2, &[e * e, 1.0 / (e * e)]).unwrap(),
    );

    let o = poscone(&["dist", &id, &id]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);

    let o = poscone(&["dist", &id, &d]);
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 2.0).abs() < 1e-14);

    let m3 = TracialAlgebra::matrix(3);
    let mut r = rng(1);
    let a = random_positive(&m3, 2.0, &mut r);
    let b = random_positive(&m3, 2.0, &mut r);
    let fa = herm_file(&dir, "a.json", a.value());
    let fb = herm_file(&dir, "b.json", b.value());
    let printed: f64 = stdout(&poscone(&["dist", &fa, &fb])).trim().parse().unwrap();
    let a = pio::parse_positive(&fs::read_to_string(&fa).unwrap()).unwrap();
    let b = pio::parse_positive(&fs::read_to_string(&fb).unwrap()).unwrap();
    assert_eq!(printed, dist(&a, &b).unwrap());
}

#[test]
fn dist_input_errors() {
    let dir = workdir("dist_errors");
    let missing = dir.join("missing.json").to_string_lossy().into_owned();
    let bad = write(&dir, "bad.json", "{not json");
    let a2 = herm_file(&dir, "a2.json", &HermitianElement::identity(&TracialAlgebra::matrix(2)));
    let a3 = herm_file(&dir, "a3.json", &HermitianElement::identity(&TracialAlgebra::matrix(3)));
    let neg = herm_file(&dir, "neg.json", &pauli::sigma_z());
    for args in [
        vec!["dist", &a2, &missing],
        vec!["dist", &a2, &bad],
        vec!["dist", &a2, &a3],
        vec!["dist", &a2, &neg],
        vec!["dist", &a2],
    ] {
        assert_eq!(poscone(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn geodesic_examples() {
    let dir = workdir("geodesic");
    let m3 = TracialAlgebra::matrix(3);
    let mut r = rng(2);
    let a = random_positive(&m3, 2.0, &mut r);
    let b = random_positive(&m3, 2.0, &mut r);
    let fa = herm_file(&dir, "a.json", a.value());
    let fb = herm_file(&dir, "b.json", b.value());
    let at = |t: &str| {
        let o = poscone(&["geodesic", &fa, &fb, "--t", t]);
        assert_eq!(o.status.code(), Some(0));
        pio::parse_positive(&stdout(&o)).unwrap()
    };
    assert!((at("0").value() - a.value()).norm2() <= 1e-12 * a.value().norm2());
    assert!((at("1").value() - b.value()).norm2() <= 1e-10 * b.value().norm2());
    let mid = at("0.5");
    assert!((dist(&a, &mid).unwrap() - dist(&mid, &b).unwrap()).abs() < 1e-9);
    let back = at("-1.5");
    let expect = geodesic(&a, &b).unwrap().evaluate(-1.5).unwrap();
    assert!((back.value() - expect.value()).norm2() <= 1e-12 * expect.value().norm2());

    assert_eq!(poscone(&["geodesic", &fa, &fb, "--t", "half"]).status.code(), Some(2));
    assert_eq!(poscone(&["geodesic", &fa, &fb]).status.code(), Some(2));
}

#[test]
fn json_round_trip_through_cli() {
    let dir = workdir("round_trip");
    let alg = TracialAlgebra::proportional(&[2, 1]).unwrap();
    let mut r = rng(3);
    let a = random_positive(&alg, 2.0, &mut r);
    let b = random_positive(&alg, 2.0, &mut r);
    let fa = herm_file(&dir, "a.json", a.value());
    let fb = herm_file(&dir, "b.json", b.value());
    let text = stdout(&poscone(&["geodesic", &fa, &fb, "--t", "0.3"]));
    let doc: ElementJson = pio::from_json(&text).unwrap();
    assert_eq!(format!("{}\n", pio::to_json(&doc).unwrap()), text);
    let again = pio::hermitian_to_json(&pio::parse_hermitian(&text).unwrap()).unwrap();
    assert_eq!(format!("{again}\n"), text);
}

#[test]
fn project_examples() {
    let dir = workdir("project");
    let m2 = TracialAlgebra::matrix(2);
    let esx = herm_file(&dir, "esx.json", &pauli::sigma_x().exp().unwrap());
    let o = poscone(&["project", &esx, "--subspace", "diagonal"]);
    assert_eq!(o.status.code(), Some(0));
    let res: ProjectionJson = pio::from_json(&stdout(&o)).unwrap();
    let foot = res.foot.to_hermitian().unwrap();
    assert!((&foot - &HermitianElement::identity(&m2)).norm2() < 1e-12);
    assert!(res.converged);

    let inside = HermitianElement::diagonal(&m2, &[0.5, -1.25]).unwrap().exp().unwrap();
    let fin = herm_file(&dir, "inside.json", &inside);
    let res: ProjectionJson = pio::from_json(&stdout(&poscone(&["project", &fin, "--subspace", "diagonal"]))).unwrap();
    assert!((&res.foot.to_hermitian().unwrap() - &inside).norm2() < 1e-12);

    let m3 = TracialAlgebra::matrix(3);
    let x = random_positive(&m3, 2.0, &mut rng(4));
    let fx = herm_file(&dir, "x.json", x.value());
    for choice in ["diagonal", "blocks=1,3|2", "full"] {
        let o = poscone(&["project", &fx, "--subspace", choice]);
        assert_eq!(o.status.code(), Some(0), "{choice}");
        let res: ProjectionJson = pio::from_json(&stdout(&o)).unwrap();
        assert!(res.residual <= res.tolerance);
        assert!(res.tolerance <= 1e-10 * (1.0 + res.distance) * (1.0 + 1e-12));
    }

    // Subspace from a file.
    let h = standard_subspace(&m3, &SubspaceKind::BlockDiagonal(vec![vec![0, 1], vec![2]])).unwrap();
    let fh = write(&dir, "h.json", &pio::subspace_to_json(&h).unwrap());
    assert_eq!(poscone(&["project", &fx, "--subspace", &fh]).status.code(), Some(0));
}

#[test]
fn project_failures() {
    let dir = workdir("project_failures");
    let m2 = TracialAlgebra::matrix(2);
    let r = herm_file(&dir, "r.json", &HermitianElement::identity(&m2));
    let e11 = poscone::algebra::matrix_unit(&m2, 0, 0, 0);
    let bad = standard_subspace(
        &m2,
        &SubspaceKind::Span(vec![HermitianElement::new(e11), pauli::sigma_x()]),
    )
    .unwrap();
    let fb = write(&dir, "bad.json", &pio::subspace_to_json(&bad).unwrap());
    let o = poscone(&["project", &r, "--subspace", &fb]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["closed"], Value::Bool(false));
    assert!(v["witness"]["residual"].as_f64().unwrap() > 1.0);

    for choice in ["blocks=0,1|2", "blocks=1,1|2", "blocks=1", "blocks=1,x"] {
        assert_eq!(
            poscone(&["project", &r, "--subspace", choice]).status.code(),
            Some(2),
            "{choice}"
        );
    }
    let missing = dir.join("nope.json").to_string_lossy().into_owned();
    assert_eq!(poscone(&["project", &r, "--subspace", &missing]).status.code(), Some(2));
    assert_eq!(
        poscone(&["project", &r, "--subspace", "diagonal", "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    // A single iteration cannot reach the tolerance from this start.
    let x = random_positive(&TracialAlgebra::matrix(3), 2.0, &mut rng(8));
    let fx = herm_file(&dir, "x.json", x.value());
    assert_eq!(
        poscone(&["project", &fx, "--subspace", "blocks=1,2|3", "--max-iter", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn default_tolerance_from_environment() {
    let dir = workdir("env_tol");
    let x = random_positive(&TracialAlgebra::matrix(3), 2.0, &mut rng(5));
    let fx = herm_file(&dir, "x.json", x.value());
    let o = Command::new(env!("CARGO_BIN_EXE_poscone"))
        .args(["project", &fx, "--subspace", "diagonal"])
        .env("POSCONE_DEFAULT_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let res: ProjectionJson = pio::from_json(&stdout(&o)).unwrap();
    assert!((res.tolerance / (1.0 + res.distance) - 1e-6).abs() < 1e-18);
}

#[test]
fn factor_examples() {
    let dir = workdir("factor");
    let m3 = TracialAlgebra::matrix(3);
    let xd = HermitianElement::diagonal(&m3, &[0.3, -0.7, 1.1]).unwrap();
    let fx = herm_file(&dir, "xd.json", &xd);
    let o = poscone(&["factor", &fx, "--mode", "masa"]);
    assert_eq!(o.status.code(), Some(0));
    match pio::from_json::<FactorizationJson>(&stdout(&o)).unwrap() {
        FactorizationJson::Masa { d, v, .. } => {
            let d = d.to_hermitian().unwrap();
            assert!((&d - &xd.scale(0.5).exp().unwrap()).norm2() < 1e-12);
            assert!(v.to_hermitian().unwrap().norm2() < 1e-12);
        }
        other => panic!("wrong mode {other:?}"),
    }

    let u = random_unitary(&m3, &mut rng(6));
    let fu = write(&dir, "u.json", &pio::element_to_json(&u).unwrap());
    let o = poscone(&["factor", &fu, "--mode", "iwasawa", "--subspace", "diagonal"]);
    assert_eq!(o.status.code(), Some(0));
    match pio::from_json::<FactorizationJson>(&stdout(&o)).unwrap() {
        FactorizationJson::Iwasawa { x, y, u: uu, .. } => {
            assert!(x.to_hermitian().unwrap().norm2() < 1e-10);
            assert!(y.to_hermitian().unwrap().norm2() < 1e-10);
            assert!((&uu.to_element().unwrap() - &u).norm2() < 1e-10);
        }
        other => panic!("wrong mode {other:?}"),
    }

    let mut r = rng(7);
    let g = random_invertible(&m3, &mut r);
    let fg = write(&dir, "g.json", &pio::element_to_json(&g).unwrap());
    let z = random_hermitian(&m3, 0.7, &mut r);
    let fz = herm_file(&dir, "z.json", &z);
    for args in [
        vec!["factor", &fg, "--mode", "iwasawa", "--subspace", "blocks=1,2|3"],
        vec!["factor", &fz, "--mode", "symmetric", "--subspace", "diagonal"],
        vec!["factor", &fz, "--mode", "masa"],
    ] {
        let o = poscone(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}");
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert!(v["residual"].as_f64().unwrap() <= 1e-8, "{args:?}");
    }

    assert_eq!(poscone(&["factor", &fz, "--mode", "symmetric"]).status.code(), Some(2));
    assert_eq!(
        poscone(&["factor", &fz, "--mode", "masa", "--subspace", "full"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(poscone(&["factor", &fz, "--mode", "polar"]).status.code(), Some(2));
}

#[test]
fn closure_examples() {
    let dir = workdir("closure");
    let m3 = TracialAlgebra::matrix(3);
    for (name, kind) in [("diag.json", SubspaceKind::Diagonal), ("full.json", SubspaceKind::Full)] {
        let h = standard_subspace(&m3, &kind).unwrap();
        let f = write(&dir, name, &pio::subspace_to_json(&h).unwrap());
        let o = poscone(&["closure", &f]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["closed"], Value::Bool(true));
    }

    let m2 = TracialAlgebra::matrix(2);
    let e11 = HermitianElement::new(poscone::algebra::matrix_unit(&m2, 0, 0, 0));
    let bad = standard_subspace(&m2, &SubspaceKind::Span(vec![e11, pauli::sigma_x()])).unwrap();
    let f = write(&dir, "bad.json", &pio::subspace_to_json(&bad).unwrap());
    let o = poscone(&["closure", &f]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["closed"], Value::Bool(false));
    let w = &v["witness"];
    assert!(w["offending"].is_object() && w["x"].is_object() && w["y"].is_object());

    let garbage = write(&dir, "garbage.json", "[]");
    assert_eq!(poscone(&["closure", &garbage]).status.code(), Some(2));
}

#[test]
fn verify_examples() {
    let o = poscone(&["verify", "--suite", "emi", "--trials", "1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v.get("wall_time_seconds").is_none());

    let o = poscone(&["verify", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["properties"]
        .as_array()
        .unwrap()
        .iter()
        .all(|p| p["instances"] == 0 && p["pass"] == Value::Bool(true)));

    for args in [
        vec!["verify", "--suite", "bogus"],
        vec!["verify", "--dims", "1,2"],
        vec!["verify", "--dims", "two"],
        vec!["verify", "--trials", "-3"],
        vec!["verify", "--tol", "0"],
    ] {
        assert_eq!(poscone(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_output_file_and_timing() {
    let dir = workdir("verify_out");
    let out = dir.join("report.json").to_string_lossy().into_owned();
    let o = poscone(&[
        "verify",
        "--suite",
        "convexity",
        "--trials",
        "2",
        "--out",
        &out,
        "--timing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(v["suite"], "convexity");
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--suite", "projection", "--trials", "3", "--seed", "9"];
    let a = poscone(&args);
    let b = poscone(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = poscone(&["verify", "--suite", "projection", "--trials", "3", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_reports_failures_with_exit_1() {
    // Tolerances shrunk far below rounding make most properties fail.
    let o = poscone(&["verify", "--suite", "emi", "--trials", "2", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], Value::Bool(false));
}

#[test]
fn standard_input() {
    use std::io::Write;
    use std::process::Stdio;
    let dir = workdir("stdin");
    let m2 = TracialAlgebra::matrix(2);
    let id = herm_file(&dir, "id.json", &HermitianElement::identity(&m2));
    let p = PositiveElement::exp(&pauli::sigma_z()).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_poscone"))
        .args(["dist", &id, "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(pio::hermitian_to_json(p.value()).unwrap().as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!((stdout(&o).trim().parse::<f64>().unwrap() - 1.0).abs() < 1e-14);
}
