use std::path::Path;
use std::process::{Command, Output};

use meissner::ballpoly::ReuleauxPolyhedron;
use meissner::io::{read_obj, read_stl, save_json};
use meissner::surgery::{perform_partial_surgery, perform_surgery, SurgeryChoice};
use meissner::{make_regular, Tolerance};

fn meissner(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meissner"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn regular_pentagon_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&meissner(d, &["gen", "--n", "5", "--kind", "regular", "-o", "p.json"])), 0);
    assert_eq!(code(&meissner(d, &["build", "p.json", "--surgery", "bottom", "-o", "m.json"])), 0);
    let out = meissner(d, &["verify", "m.json", "--directions", "100000", "--tol", "1e-9", "-o", "r.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&d.join("r.json"));
    assert_eq!(r["pass"], true);
    assert_eq!(r["width"]["directions_sampled"], 100000);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"meissner.slice_matches_polygon"));
    assert!(names.contains(&"solid.involution"));
}

#[test]
fn one_sharp_pair_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let tol = Tolerance::default();
    let phi = ReuleauxPolyhedron::from_polygon(&make_regular(3).unwrap(), &tol).unwrap();
    let mut mask = perform_surgery(&phi, &SurgeryChoice::Bottom, &tol).unwrap().mask;
    mask[0] = None;
    let partial = perform_partial_surgery(&phi, mask, &tol).unwrap();
    save_json(&partial, &dir.path().join("partial.json")).unwrap();

    let out = meissner(dir.path(), &["verify", "partial.json", "--directions", "20000", "-o", "r.json"]);
    assert_eq!(code(&out), 1);
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["pass"], false);
    assert_eq!(r["width"]["pass"], false);
    assert!(r["width"]["max_width"].as_f64().unwrap() > 1.0 + 1e-4);
    assert_eq!(r["width"]["worst_direction"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&meissner(d, &["gen", "--n", "3", "--kind", "regular", "-o", "p.json"])), 0);
    for args in [
        &["build", "p.json", "--surgery", "mask:FF"][..],
        &["build", "p.json", "--surgery", "mask:8"],
        &["build", "p.json", "--surgery", "sideways"],
        &["build", "p.json", "--bogus"],
        &["gen", "--n", "4"],
        &["gen", "--n", "5", "--kind", "square"],
        &["build", "missing.json"],
        &["verify", "p.json", "--tol", "0.5"],
        &["mesh", "p.json"],
    ] {
        let out = meissner(d, args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&meissner(d, &["build", "p.json", "--surgery", "mask:5", "-o", "m.json"])), 0);
}

#[test]
fn mesh_exports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    meissner(d, &["gen", "--n", "7", "--seed", "2", "-o", "p.json"]);
    meissner(d, &["build", "p.json", "--surgery", "top", "-o", "m.json"]);
    assert_eq!(code(&meissner(d, &["mesh", "m.json", "--level", "3", "-o", "m.stl"])), 0);
    let stl = read_stl(&std::fs::read(d.join("m.stl")).unwrap()).unwrap();
    stl.check_watertight().unwrap();
    assert_eq!(code(&meissner(d, &["mesh", "m.json", "--level", "3", "--format", "obj", "-o", "m.mesh"])), 0);
    let obj = read_obj(&std::fs::read_to_string(d.join("m.mesh")).unwrap()).unwrap();
    obj.check_watertight().unwrap();
    assert!(obj.orientation_consistent());
    assert_eq!(obj.triangles.len(), stl.triangles.len());
}

#[test]
fn info_graph_and_resurgery() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    meissner(d, &["gen", "--n", "5", "--seed", "42", "-o", "p.json"]);
    assert_eq!(code(&meissner(d, &["build", "p.json", "-o", "s.json"])), 0);
    assert_eq!(code(&meissner(d, &["surgery", "s.json", "--surgery", "mask:7f", "-o", "m.json"])), 0);
    let out = meissner(d, &["info", "m.json", "--level", "4", "--threads", "1"]);
    assert_eq!(code(&out), 0);
    let info: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(info["artifact"], "meissner");
    assert_eq!((info["vertices"].as_u64(), info["edges"].as_u64()), (Some(8), Some(14)));
    assert_eq!(info["euler"], 2);
    assert!((info["max_width"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(code(&meissner(d, &["surgery", "p.json", "--surgery", "bottom"])), 2);

    let out = meissner(d, &["graph", "p.json"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("graph"));
    assert_eq!(code(&meissner(d, &["graph", "s.json", "-o", "g.dot"])), 0);
    assert!(std::fs::read_to_string(d.join("g.dot")).unwrap().contains("--"));

    assert_eq!(code(&meissner(d, &["graph", "p.json", "--json", "-o", "d.json"])), 0);
    let diagram = json(&d.join("d.json"));
    assert_eq!(diagram["faces"].as_array().unwrap().len(), 3);
    assert_eq!(diagram["tree"].as_array().unwrap().len(), 7);
    let out = meissner(d, &["verify", "d.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&meissner(d, &["graph", "s.json", "--json"])), 2);
}
