//! Numerical verification: constant width, antipodes, diameters, Euler
//! counts, the half-body diameter, planar sections and volumes.
//!
//! # Width through the skeleton
//!
//! A Meissner body is `Ψ = ∩_{c ∈ N} B(c, 1)` over its skeleton `N`
//! (vertices and retained arcs). Its support function is evaluated exactly:
//! let `c₋` minimize `u · c` over `N`. Since `Ψ ⊂ B(c₋, 1)`, `h_Ψ(u) ≤ c₋ · u + 1`
//! with equality iff `c₋ + u ∈ Ψ`. Otherwise the maximizer is a singular
//! boundary point (on two or more spheres), i.e. a vertex or a sharp edge
//! arc, all of which belong to `N`; so `h_Ψ(u) = max_{c ∈ N} c · u`. The plain
//! sum `S_N(u) + S_N(-u)` is the width of `conv N`, not of `Ψ`, and is not
//! used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ballpoly::{diameter_graph, ReuleauxPolyhedron};
use crate::error::Result;
use crate::geom::{slerp, Arc3, ArcFrame, Point2, Point3, Tolerance, Vector2, Vector3};
use crate::mesh::TriangleMesh;
use crate::report::Report;
use crate::reuleaux::ReuleauxPolygon;
use crate::surgery::MeissnerSolid;

/// Membership slack for `c₋ + u ∈ Ψ`; exact ties sit at rounding level.
const MEMBER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionScheme {
    Fibonacci,
    UniformRandom(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionSampler {
    pub count: usize,
    pub scheme: DirectionScheme,
}

impl DirectionSampler {
    pub fn fibonacci(count: usize) -> Self {
        Self {
            count,
            scheme: DirectionScheme::Fibonacci,
        }
    }

    pub fn random(count: usize, seed: u64) -> Self {
        Self {
            count,
            scheme: DirectionScheme::UniformRandom(seed),
        }
    }

    pub fn directions(&self) -> Vec<Vector3> {
        match self.scheme {
            DirectionScheme::Fibonacci => {
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                let n = self.count as f64;
                (0..self.count)
                    .map(|i| {
                        let z = 1.0 - (2.0 * i as f64 + 1.0) / n;
                        let r = (1.0 - z * z).max(0.0).sqrt();
                        let phi = golden * i as f64;
                        Vector3::new(r * phi.cos(), r * phi.sin(), z).normalize()
                    })
                    .collect()
            }
            DirectionScheme::UniformRandom(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::with_capacity(self.count);
                while out.len() < self.count {
                    let v = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
                    let len = v.norm();
                    if len > 1e-9 {
                        out.push(v / len);
                    }
                }
                out
            }
        }
    }
}

/// Exact support function of `∩ B(c, 1)` over a skeleton of points and arcs.
#[derive(Debug, Clone)]
pub struct SkeletonSupport {
    points: Vec<Point3>,
    centers: Vec<ArcFrame>,
    sharp: Vec<ArcFrame>,
}

impl SkeletonSupport {
    /// Skeleton whose arcs are both ball centers and sharp edges.
    pub fn new(points: &[Point3], arcs: &[Arc3]) -> Self {
        Self::with_sharp(points, arcs, arcs)
    }

    /// Separate center arcs and sharp arcs; they differ only for partial surgery.
    pub fn with_sharp(points: &[Point3], arcs: &[Arc3], sharp: &[Arc3]) -> Self {
        Self {
            points: points.to_vec(),
            centers: arcs.iter().map(ArcFrame::new).collect(),
            sharp: sharp.iter().map(ArcFrame::new).collect(),
        }
    }

    pub fn for_solid(m: &MeissnerSolid) -> Self {
        let (points, arcs) = m.skeleton();
        Self::with_sharp(&points, &arcs, &m.sharp_arcs())
    }

    pub fn contains(&self, q: &Point3, slack: f64) -> bool {
        let r2 = (1.0 + slack) * (1.0 + slack);
        self.points.iter().all(|p| (q - p).norm_squared() <= r2)
            && self.centers.iter().all(|a| a.max_distance_sq(q) <= r2)
    }

    /// Largest distance from `q` to the skeleton, minus 1.
    pub fn excess(&self, q: &Point3) -> f64 {
        let mut d2 = self.points.iter().map(|p| (q - p).norm_squared()).fold(0.0, f64::max);
        for a in &self.centers {
            d2 = d2.max(a.max_distance_sq(q));
        }
        d2.sqrt() - 1.0
    }

    /// `max c · u` over the points and sharp arcs.
    pub fn sharp_support(&self, u: &Vector3) -> f64 {
        let mut best = self.points.iter().map(|p| p.coords.dot(u)).fold(f64::NEG_INFINITY, f64::max);
        for a in &self.sharp {
            best = best.max(a.support(u));
        }
        best
    }

    /// Support function of the body in direction `u` (unit).
    pub fn support(&self, u: &Vector3) -> f64 {
        let mut low = f64::INFINITY;
        let mut arg = Point3::origin();
        for p in &self.points {
            let v = p.coords.dot(u);
            if v < low {
                low = v;
                arg = *p;
            }
        }
        let neg = -u;
        for a in &self.centers {
            let (v, q) = a.support_point(&neg);
            if -v < low {
                low = -v;
                arg = q;
            }
        }
        if self.contains(&(arg + u), MEMBER_SLACK) {
            low + 1.0
        } else {
            self.sharp_support(u)
        }
    }

    pub fn width(&self, u: &Vector3) -> f64 {
        self.support(u) + self.support(&-u)
    }
}

/// Width of `∩ B(c, 1)` over the skeleton `(points, arcs)` in direction `u`.
pub fn skeleton_width(points: &[Point3], arcs: &[Arc3], u: &Vector3) -> f64 {
    SkeletonSupport::new(points, arcs).width(&u.normalize())
}

/// `S_N(u) + S_N(-u)`: the width of the convex hull of the skeleton.
pub fn hull_width(points: &[Point3], arcs: &[Arc3], u: &Vector3) -> f64 {
    let s = |v: &Vector3| {
        let mut best = points.iter().map(|p| p.coords.dot(v)).fold(f64::NEG_INFINITY, f64::max);
        for a in arcs {
            best = best.max(a.support(v).0);
        }
        best
    };
    s(u) + s(&-u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub directions_sampled: usize,
    pub min_width: f64,
    pub max_width: f64,
    pub worst_direction: Vector3,
    pub tolerance: f64,
    pub pass: bool,
}

/// Width extremes over `dirs`; deterministic regardless of thread schedule.
pub fn width_over<F>(dirs: &[Vector3], tol: f64, width: F) -> WidthReport
where
    F: Fn(&Vector3) -> f64 + Sync,
{
    #[derive(Clone, Copy)]
    struct Acc {
        min: f64,
        max: f64,
        worst: usize,
        dev: f64,
    }
    let merge = |a: Acc, b: Acc| {
        let (dev, worst) = if b.dev > a.dev || (b.dev == a.dev && b.worst < a.worst) {
            (b.dev, b.worst)
        } else {
            (a.dev, a.worst)
        };
        Acc {
            min: a.min.min(b.min),
            max: a.max.max(b.max),
            worst,
            dev,
        }
    };
    let empty = Acc {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
        worst: usize::MAX,
        dev: f64::NEG_INFINITY,
    };
    let acc = dirs
        .par_iter()
        .enumerate()
        .with_min_len(256)
        .map(|(i, u)| {
            let w = width(u);
            Acc {
                min: w,
                max: w,
                worst: i,
                dev: (w - 1.0).abs(),
            }
        })
        .reduce(|| empty, merge);
    WidthReport {
        directions_sampled: dirs.len(),
        min_width: acc.min,
        max_width: acc.max,
        worst_direction: dirs.get(acc.worst).copied().unwrap_or_else(Vector3::zeros),
        tolerance: tol,
        pass: !dirs.is_empty() && acc.dev <= tol,
    }
}

/// Samples the width of the body over the sampler's directions.
pub fn constant_width_check(m: &MeissnerSolid, sampler: &DirectionSampler, tol: f64) -> WidthReport {
    let support = SkeletonSupport::for_solid(m);
    width_over(&sampler.directions(), tol, |u| support.width(u))
}

/// Width of a mesh's vertex set in direction `u`.
pub fn mesh_width(mesh: &TriangleMesh, u: &Vector3) -> f64 {
    let (lo, hi) = mesh
        .vertices
        .iter()
        .map(|p| p.coords.dot(u))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    hi - lo
}

/// Unit-distance pairs of the center set.
pub fn diameter_count(x: &[Point3], tol: &Tolerance) -> usize {
    diameter_graph(x, tol).edges.len()
}

pub fn euler_check(phi: &ReuleauxPolyhedron) -> Report {
    let (v, e, f) = (phi.vertices.len() as i64, phi.edges.len() as i64, phi.faces.len() as i64);
    let mut r = Report::new();
    r.push_detail("euler", v - e + f == 2, (v - e + f - 2) as f64, format!("{v} - {e} + {f} = {}", v - e + f));
    r
}

/// Largest distance between samples of the edge arcs (and the vertices).
pub fn edge_sample_diameter(phi: &ReuleauxPolyhedron, per_edge: usize) -> f64 {
    let mut pts = phi.centers.clone();
    for e in &phi.edges {
        for k in 0..=per_edge {
            pts.push(e.arc.point_at(k as f64 / per_edge as f64));
        }
    }
    max_pairwise(&pts).0
}

/// Largest pairwise distance and a pair attaining it.
pub fn max_pairwise(pts: &[Point3]) -> (f64, (usize, usize)) {
    let (d2, pair) = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (0.0, (i, i));
            for j in i + 1..pts.len() {
                let d = (pts[i] - pts[j]).norm_squared();
                if d > best.0 {
                    best = (d, (i, j));
                }
            }
            best
        })
        .reduce(|| (0.0, (0, 0)), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    (d2.sqrt(), pair)
}

/// Boundary samples of the half body `P⁺ = (∩ B(p_i, 1)) ∩ {z ≥ 0}`: its
/// vertices, the base arcs and points of the upper surface.
pub fn half_body_samples(poly: &ReuleauxPolygon, tops: &[Point3], count: usize, seed: u64) -> Vec<Point3> {
    let n = poly.n();
    let mut pts: Vec<Point3> = poly.vertices().iter().map(|p| Point3::new(p.x, p.y, 0.0)).collect();
    pts.extend_from_slice(tops);
    let arc_samples = (count / 3).max(n);
    for k in 0..arc_samples {
        let i = k % n;
        let t = ((k / n) as f64 + 0.5) / (arc_samples / n + 1) as f64;
        let p = poly.arc_point(i, t);
        pts.push(Point3::new(p.x, p.y, 0.0));
    }
    let c = poly.centroid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uni = rand_distr::Uniform::new(-0.6, 0.6).expect("valid range");
    while pts.len() < count {
        let q = c + Vector2::new(uni.sample(&mut rng), uni.sample(&mut rng));
        if !poly.contains(&q, 0.0) {
            continue;
        }
        pts.push(Point3::new(q.x, q.y, upper_height(poly, &q)));
    }
    pts
}

/// Height of the upper surface of `∩ B(p_i, 1)` over a point of `P`.
pub fn upper_height(poly: &ReuleauxPolygon, q: &Point2) -> f64 {
    poly.vertices()
        .iter()
        .map(|p| (1.0 - (q - p).norm_squared()).max(0.0).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Diameter of a sample set of `P⁺`: at most 1 and attained.
pub fn half_body_diameter_check(samples: &[Point3], tol: &Tolerance) -> Report {
    let (d, pair) = max_pairwise(samples);
    let mut r = Report::new();
    r.push_detail(
        "half_body_diameter",
        (d - 1.0).abs() <= tol.eq,
        (d - 1.0).abs(),
        format!("max distance {d} between samples {} and {}", pair.0, pair.1),
    );
    r
}

/// Every boundary point has an antipode at distance 1 on the surface.
pub fn antipode_check(m: &MeissnerSolid, samples: usize, seed: u64, tol: &Tolerance) -> Report {
    let support = SkeletonSupport::for_solid(m);
    let on_surface = |q: &Point3| support.excess(q).abs() <= tol.eq;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new();

    // caps: P = x + u inside the body, antipode x
    let nv = m.base.n_vertices();
    let mut cap_res: f64 = 0.0;
    let mut cap_ok = true;
    let mut found = 0;
    let mut tries = 0;
    while found < samples && tries < 200 * samples {
        tries += 1;
        let x = tries % nv;
        let u = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng)).normalize();
        let p = m.vertex(x) + u;
        if !support.contains(&p, tol.eq) {
            continue;
        }
        found += 1;
        let q = m.vertex(x);
        cap_res = cap_res.max(((p - q).norm() - 1.0).abs()).max(support.excess(&p).abs());
        cap_ok &= on_surface(&q) && on_surface(&p);
    }
    r.push_detail("antipode_caps", cap_ok && found == samples && cap_res <= tol.eq, cap_res, format!("{found} samples"));

    // wedges: P on the arc centered at dual(s), antipode dual(s)
    let mut wedge_res: f64 = 0.0;
    let mut wedge_ok = true;
    let uni = rand_distr::Uniform::new(0.0, 1.0).expect("valid range");
    for w in &m.wedges {
        for _ in 0..samples.div_ceil(m.wedges.len().max(1)) {
            let (s, t) = (uni.sample(&mut rng), uni.sample(&mut rng));
            let p = m.wedge_point(w, s, t);
            let q = w.dual_arc.point_at(s);
            wedge_res = wedge_res.max(((p - q).norm() - 1.0).abs()).max(support.excess(&p).abs());
            wedge_ok &= on_surface(&q);
        }
    }
    r.push("antipode_wedges", wedge_ok && wedge_res <= tol.eq, wedge_res);

    // vertices: a diameter neighbor
    let g = diameter_graph(&m.base.centers, tol);
    let vert_ok = (0..nv).all(|v| g.neighbors(v).iter().any(|&q| on_surface(&m.vertex(q))));
    r.push("antipode_vertices", vert_ok, 0.0);

    // seams: P on Σ_a, antipode a; retained arcs: antipode x
    let mut seam_res: f64 = 0.0;
    for w in &m.wedges {
        for k in 0..16 {
            let t = (k as f64 + 0.5) / 16.0;
            for (at, sigma) in [(w.a, &w.sigma_a), (w.b, &w.sigma_b)] {
                let p = sigma.point_at(t);
                seam_res = seam_res
                    .max(((p - m.vertex(at)).norm() - 1.0).abs())
                    .max(support.excess(&p).abs());
            }
            let p = w.dual_arc.point_at(t);
            seam_res = seam_res
                .max(((p - m.vertex(w.x)).norm() - 1.0).abs())
                .max(support.excess(&p).abs());
        }
    }
    r.push("antipode_seams", seam_res <= tol.eq, seam_res);
    r
}

/// Normal chords from the interior of each retained arc end at a vertex or
/// on the wedge that replaced its dual edge, at distance 1.
pub fn normal_chord_check(m: &MeissnerSolid, per_arc: usize, tol: &Tolerance) -> Report {
    let support = SkeletonSupport::for_solid(m);
    let mut res: f64 = 0.0;
    for w in &m.wedges {
        let (xp, yp) = (m.vertex(w.x), m.vertex(w.y));
        for i in 0..per_arc {
            let s = (i as f64 + 0.5) / per_arc as f64;
            let p = w.dual_arc.point_at(s);
            let (nx, ny) = ((p - xp).normalize(), (p - yp).normalize());
            for j in 0..=8 {
                let t = j as f64 / 8.0;
                let q = p - slerp(&nx, &ny, t);
                let expect = if j == 0 {
                    xp
                } else if j == 8 {
                    yp
                } else {
                    m.wedge_point(w, s, t)
                };
                res = res
                    .max((q - expect).norm())
                    .max(((q - p).norm() - 1.0).abs())
                    .max(support.excess(&q).abs());
            }
        }
    }
    let mut r = Report::new();
    r.push("normal_chords", res <= tol.eq, res);
    r
}

/// Recovers the generating polygon from the centers lying in `z = 0`.
pub fn base_polygon(phi: &ReuleauxPolyhedron, tol: &Tolerance) -> Option<ReuleauxPolygon> {
    let verts: Vec<Point2> = phi
        .centers
        .iter()
        .filter(|c| c.z.abs() <= tol.eq)
        .map(|c| Point2::new(c.x, c.y))
        .collect();
    if verts.len() < 3 || verts.len().is_multiple_of(2) {
        return None;
    }
    let poly = ReuleauxPolygon::from_vertices(verts);
    poly.validate(tol).pass().then_some(poly)
}

/// The `z = 0` section of the body matches the polygon: exit distances of
/// `rays` rays from the centroid, found by bisection, against the polygon's.
pub fn slice_check(m: &MeissnerSolid, poly: &ReuleauxPolygon, rays: usize, tol: &Tolerance) -> Report {
    let support = SkeletonSupport::for_solid(m);
    let c = poly.centroid();
    let mut worst: f64 = 0.0;
    for k in 0..rays {
        let a = std::f64::consts::TAU * (k as f64 + 0.5) / rays as f64;
        let w = Vector2::new(a.cos(), a.sin());
        let at = |d: f64| Point3::new(c.x + d * w.x, c.y + d * w.y, 0.0);
        let (mut lo, mut hi) = (0.0, 2.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if support.excess(&at(mid)) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max((lo - poly.ray_exit(&c, &w)).abs());
    }
    let mut r = Report::new();
    r.push_detail("slice_matches_polygon", worst <= tol.eq, worst, format!("{rays} rays"));
    r
}

/// Volume by the divergence theorem and total area of a closed mesh.
pub fn volume_and_area(mesh: &TriangleMesh) -> Result<(f64, f64)> {
    mesh.check_watertight()?;
    let mut vol = 0.0;
    let mut area = 0.0;
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i].coords);
        vol += a.dot(&b.cross(&c)) / 6.0;
        area += (b - a).cross(&(c - a)).norm() / 2.0;
    }
    Ok((vol, area))
}

/// Closed-form volume of the Meissner tetrahedron of width 1.
pub fn meissner_volume() -> f64 {
    std::f64::consts::PI * (2.0 / 3.0 - 3f64.sqrt() / 4.0 * (1.0f64 / 3.0).acos())
}
