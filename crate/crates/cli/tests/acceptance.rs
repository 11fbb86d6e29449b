//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Run with `cargo test -p meissner-cli --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use meissner::analysis::{
    constant_width_check, diameter_count, edge_sample_diameter, half_body_diameter_check, half_body_samples,
    mesh_width, meissner_volume, slice_check, volume_and_area, width_over, DirectionSampler, SkeletonSupport,
};
use meissner::ballpoly::{lift, ReuleauxPolyhedron};
use meissner::fpvd::farthest_point_diagram;
use meissner::mesh::{tessellate, unit_sphere_mesh};
use meissner::surgery::{perform_partial_surgery, perform_surgery, MeissnerSolid, SurgeryChoice};
use meissner::{make_random, make_regular, Point3, ReuleauxPolygon, Tolerance};

/// Closed form π(2/3 − (√3/4)·arccos(1/3)), evaluated offline.
const MEISSNER_VOLUME: f64 = 0.4198600;
/// √3 − √2/2.
const TETRA_OVERWIDTH: f64 = 1.0249440;

struct Instance {
    label: String,
    poly: ReuleauxPolygon,
    tops: Vec<Point3>,
    phi: Result<ReuleauxPolyhedron, String>,
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn instances() -> Vec<Instance> {
    let mut polys = Vec::new();
    for n in [3, 5, 7, 9, 11] {
        polys.push((format!("n={n} regular"), make_regular(n).unwrap()));
        for seed in 0..20 {
            polys.push((format!("n={n} seed={seed}"), make_random(n, seed).unwrap()));
        }
    }
    polys
        .into_iter()
        .map(|(label, poly)| {
            let d = farthest_point_diagram(&poly, &tol()).unwrap();
            let tops = lift(&poly, &d).unwrap().tops;
            let phi = ReuleauxPolyhedron::from_polygon(&poly, &tol()).map_err(|e| e.to_string());
            Instance { label, poly, tops, phi }
        })
        .collect()
}

type Outcome = (bool, String);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn criterion_1() -> Outcome {
    let poly = make_regular(3).unwrap();
    let d = farthest_point_diagram(&poly, &tol()).unwrap();
    let l = lift(&poly, &d).unwrap();
    let apex = l.tops[0].z;
    let apex_err = (apex - (2.0f64 / 3.0).sqrt()).abs();
    let mut dist_err: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            dist_err = dist_err.max(((l.points[i] - l.points[j]).norm() - 1.0).abs());
        }
    }
    let phi = ReuleauxPolyhedron::build(&l.points, &tol()).unwrap();
    let adj = phi.adjacency();
    let k4 = phi.n_vertices() == 4 && adj.iter().all(|a| a.len() == 3) && phi.edges.len() == 6;
    let ok = l.tops.len() == 1 && apex_err <= 1e-12 && dist_err <= 1e-12 && k4 && phi.edges.len() == 2 * phi.n_vertices() - 2;
    (ok, format!("apex error {apex_err:.1e}, unit distances within {dist_err:.1e}, K4 {k4}, |E| = {}", phi.edges.len()))
}

fn criterion_2(all: &[Instance]) -> Outcome {
    let mut bad = Vec::new();
    for inst in all {
        let phi = match &inst.phi {
            Ok(phi) => phi,
            Err(e) => {
                bad.push(format!("{}: {e}", inst.label));
                continue;
            }
        };
        let r = phi.validate(&tol());
        let (v, e, f) = (phi.n_vertices() as i64, phi.edges.len() as i64, phi.faces.len() as i64);
        let checks = ["involution", "metric_embedding", "euler", "edge_count", "three_connected", "diameter_count"];
        let failing: Vec<_> = checks.iter().filter(|c| !r.get(c).is_some_and(|c| c.pass)).collect();
        if !failing.is_empty() || v - e + f != 2 || e != 2 * v - 2 || diameter_count(&phi.centers, &tol()) as i64 != e {
            bad.push(format!("{}: {failing:?} v={v} e={e} f={f}", inst.label));
        }
    }
    (bad.is_empty(), format!("{} bodies, failures: {bad:?}", all.len()))
}

fn criterion_3(all: &[Instance]) -> Outcome {
    let dirs = DirectionSampler::fibonacci(100_000);
    let mut worst: f64 = 0.0;
    let mut control_min = f64::INFINITY;
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut bodies = 0;
    for inst in all {
        let Ok(phi) = &inst.phi else {
            bad.push(format!("{}: no polyhedron", inst.label));
            continue;
        };
        let bottom = match perform_surgery(phi, &SurgeryChoice::Bottom, &tol()) {
            Ok(m) => m,
            Err(e) => {
                bad.push(format!("{}: {e}", inst.label));
                continue;
            }
        };
        let pairs = bottom.pairs.len();
        let mut solids = vec![bottom.clone()];
        for _ in 0..5 {
            let bits: Vec<bool> = (0..pairs).map(|_| rng.random()).collect();
            solids.push(perform_surgery(phi, &SurgeryChoice::Mask(bits), &tol()).unwrap());
        }
        for m in &solids {
            let w = constant_width_check(m, &dirs, 1e-9);
            bodies += 1;
            worst = worst.max(w.max_width - 1.0).max(1.0 - w.min_width);
            if !w.pass {
                bad.push(format!("{}: width in [{}, {}]", inst.label, w.min_width, w.max_width));
            }
        }
        // leave the pair with the longest rounded edge unsurgered
        let p = (0..pairs)
            .max_by(|&a, &b| {
                let len = |p: usize| bottom.wedges[p].dual_arc.sweep.min(phi.edges[bottom.wedges[p].surgered].arc.sweep);
                len(a).total_cmp(&len(b))
            })
            .unwrap();
        let mut mask: Vec<Option<bool>> = bottom.mask.clone();
        mask[bottom.wedges[p].pair] = None;
        let control = perform_partial_surgery(phi, mask, &tol()).unwrap();
        let w = constant_width_check(&control, &dirs, 1e-9);
        control_min = control_min.min(w.max_width - 1.0);
        if w.pass || w.max_width < 1.0 + 1e-4 {
            bad.push(format!("{}: control max width {}", inst.label, w.max_width));
        }
    }
    (
        bad.is_empty(),
        format!(
            "{bodies} solids, max |width - 1| = {worst:.1e}; controls exceed 1 by at least {control_min:.2e}; failures: {bad:?}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let phi = ReuleauxPolyhedron::from_polygon(&make_regular(3).unwrap(), &tol()).unwrap();
    let d = edge_sample_diameter(&phi, 256);
    let oracle = 3f64.sqrt() - 2f64.sqrt() / 2.0;
    let ok = (d - TETRA_OVERWIDTH).abs() <= 1e-3 && (oracle - TETRA_OVERWIDTH).abs() < 1e-7;
    (ok, format!("max boundary distance {d:.7}, oracle {TETRA_OVERWIDTH}"))
}

fn criterion_5(all: &[Instance]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (k, inst) in all.iter().enumerate() {
        let s = half_body_samples(&inst.poly, &inst.tops, 1000, k as u64);
        let r = half_body_diameter_check(&s, &tol());
        worst = worst.max(r.checks[0].residual);
        let scaled: Vec<Point3> = s.iter().map(|p| p * 1.01).collect();
        let control = half_body_diameter_check(&scaled, &tol());
        if !r.pass() || control.pass() {
            bad.push(inst.label.clone());
        }
    }
    (bad.is_empty(), format!("{} half bodies, max |diam - 1| = {worst:.1e}; failures: {bad:?}", all.len()))
}

fn regular_meissner() -> MeissnerSolid {
    let phi = ReuleauxPolyhedron::from_polygon(&make_regular(3).unwrap(), &tol()).unwrap();
    perform_surgery(&phi, &SurgeryChoice::Bottom, &tol()).unwrap()
}

fn criterion_6() -> Outcome {
    let closed_form = PI * (2.0 / 3.0 - 3f64.sqrt() / 4.0 * (1.0f64 / 3.0).acos());
    let m = regular_meissner();
    let v6 = volume_and_area(&tessellate(&m, 6)).unwrap().0;
    let v7 = volume_and_area(&tessellate(&m, 7)).unwrap().0;
    let (e6, e7) = ((v6 - MEISSNER_VOLUME).abs(), (v7 - meissner_volume()).abs());
    let sphere = volume_and_area(&unit_sphere_mesh(7)).unwrap().0;
    let sphere_err = (sphere - 4.0 * PI / 3.0).abs();
    let ok = (closed_form - MEISSNER_VOLUME).abs() < 1e-7
        && (meissner_volume() - closed_form).abs() < 1e-15
        && e6 <= 2e-3
        && e7 < (v6 - meissner_volume()).abs()
        && sphere_err <= 1e-3;
    (ok, format!("level 6 volume {v6:.7} (error {e6:.2e}), level 7 error {e7:.2e}, sphere error {sphere_err:.2e}"))
}

fn criterion_7(all: &[Instance]) -> Outcome {
    let mut bad = Vec::new();
    let mut max_diam: f64 = 0.0;
    let mut meshes = 0;
    for inst in all.iter().filter(|i| i.label.ends_with("regular") || i.label.ends_with("seed=0")) {
        let Ok(phi) = &inst.phi else { continue };
        let m = perform_surgery(phi, &SurgeryChoice::Bottom, &tol()).unwrap();
        let level = if m.pairs.len() <= 3 { 6 } else { 4 };
        let mesh = tessellate(&m, level);
        meshes += 1;
        let d = mesh.vertex_diameter();
        max_diam = max_diam.max(d);
        if mesh.check_watertight().is_err() || !mesh.orientation_consistent() || d > 1.0 + 1e-9 {
            bad.push(format!("{} level {level}: diameter {d}", inst.label));
        }
    }
    let mut max_dev: f64 = 0.0;
    let dirs = DirectionSampler::fibonacci(1000).directions();
    for (label, poly) in [("n=3 regular", make_regular(3).unwrap()), ("n=5 seed=0", make_random(5, 0).unwrap())] {
        let phi = ReuleauxPolyhedron::from_polygon(&poly, &tol()).unwrap();
        let m = perform_surgery(&phi, &SurgeryChoice::Bottom, &tol()).unwrap();
        let mesh = tessellate(&m, 6);
        let support = SkeletonSupport::for_solid(&m);
        let dev = width_over(&dirs, 5e-3, |u| mesh_width(&mesh, u) - support.width(u) + 1.0);
        max_dev = max_dev.max(dev.max_width - 1.0).max(1.0 - dev.min_width);
        if !dev.pass {
            bad.push(format!("{label}: mesh width deviates by {max_dev:.2e}"));
        }
    }
    (
        bad.is_empty(),
        format!("{meshes} meshes, max vertex diameter {max_diam:.17}; mesh/skeleton width gap {max_dev:.2e}; failures: {bad:?}"),
    )
}

fn criterion_8(all: &[Instance]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for inst in all {
        let Ok(phi) = &inst.phi else { continue };
        let m = perform_surgery(phi, &SurgeryChoice::Bottom, &tol()).unwrap();
        let r = slice_check(&m, &inst.poly, 256, &tol());
        worst = worst.max(r.checks[0].residual);
        if !r.pass() {
            bad.push(inst.label.clone());
        }
    }
    (bad.is_empty(), format!("max section deviation {worst:.1e}; failures: {bad:?}"))
}

fn criterion_9(all: &[Instance]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut wedges = 0;
    let mut bad = Vec::new();
    for inst in all {
        let Ok(phi) = &inst.phi else { continue };
        let m = perform_surgery(phi, &SurgeryChoice::Bottom, &tol()).unwrap();
        for w in &m.wedges {
            wedges += 1;
            for i in 0..64 {
                for j in 0..64 {
                    let p = m.wedge_point(w, i as f64 / 63.0, j as f64 / 63.0);
                    worst = worst.max(phi.excess(&p));
                }
            }
        }
        if worst > 1e-12 {
            bad.push(inst.label.clone());
        }
    }
    (bad.is_empty(), format!("{wedges} wedges, max excess over Φ {worst:.1e}; failures: {bad:?}"))
}

fn pipeline(dir: &Path) -> Vec<Vec<u8>> {
    let bin = env!("CARGO_BIN_EXE_meissner");
    let run = |args: &[&str]| {
        let status = Command::new(bin).current_dir(dir).args(args).status().unwrap();
        assert!(status.success(), "{args:?} -> {status}");
    };
    run(&["gen", "--n", "7", "--kind", "random", "--seed", "3", "-o", "p.json"]);
    run(&["build", "p.json", "--surgery", "mask:5a3", "-o", "m.json"]);
    run(&["verify", "m.json", "--directions", "20000", "-o", "r.json"]);
    run(&["build", "p.json", "-o", "s.json"]);
    run(&["surgery", "s.json", "--surgery", "top", "-o", "t.json"]);
    ["p.json", "m.json", "r.json", "s.json", "t.json"]
        .iter()
        .map(|f| std::fs::read(dir.join(f)).unwrap())
        .collect()
}

fn criterion_10() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (ra, rb) = (pipeline(a.path()), pipeline(b.path()));
    let bytes: usize = ra.iter().map(Vec::len).sum();
    (ra == rb, format!("{} JSON files, {bytes} bytes compared", ra.len()))
}

fn main() {
    let start = Instant::now();
    let all = instances();
    let criteria: Vec<Criterion> = vec![
        ("1 Reuleaux-triangle lift", Box::new(criterion_1)),
        ("2 ball polyhedron structure", Box::new(|| criterion_2(&all))),
        ("3 constant width", Box::new(|| criterion_3(&all))),
        ("4 tetrahedron over-width", Box::new(criterion_4)),
        ("5 half-body diameter", Box::new(|| criterion_5(&all))),
        ("6 volume oracle", Box::new(criterion_6)),
        ("7 mesh integrity", Box::new(|| criterion_7(&all))),
        ("8 slice property", Box::new(|| criterion_8(&all))),
        ("9 wedge containment", Box::new(|| criterion_9(&all))),
        ("10 determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let t = Instant::now();
        let (ok, detail) = check();
        failed += usize::from(!ok);
        println!(
            "criterion {name}: {} ({:.1}s) {detail}",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
