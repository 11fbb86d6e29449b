//! Ball polyhedra `∩ B(x, 1)` over a center set, their face lattice and the
//! self-dual graph, plus the lift of a Reuleaux polygon into space.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::TAU;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpvd::FarthestPointDiagram;
use crate::geom::{normalize_angle, plane_basis, unit_sphere_triple, Arc3, Point3, Tolerance, Vector3};
use crate::report::Report;
use crate::reuleaux::ReuleauxPolygon;

/// Triple intersections are matched to centers within this distance.
pub const VERTEX_MATCH: f64 = 1e-7;
/// Feasible runs shorter than this (radians) are touching points, not edges.
pub const MIN_EDGE_SWEEP: f64 = 1e-6;
/// Arc endpoints snap to vertices within this distance.
pub const ENDPOINT_SNAP: f64 = 1e-6;
/// Slack of the midpoint feasibility test during edge clipping.
const CLIP_SLACK: f64 = 1e-12;

/// The lifted center set: polygon vertices at `z = 0` followed by the tops
/// `(c_T, √(1 - r_T²))` in face order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub tops: Vec<Point3>,
    pub points: Vec<Point3>,
}

pub fn lift(poly: &ReuleauxPolygon, diagram: &FarthestPointDiagram) -> Result<Lift> {
    let mut tops = Vec::with_capacity(diagram.faces.len());
    for (face, f) in diagram.faces.iter().enumerate() {
        if f.radius.is_nan() || f.radius >= 1.0 {
            return Err(Error::LiftImaginary {
                face,
                radius: f.radius,
            });
        }
        tops.push(Point3::new(f.center.x, f.center.y, (1.0 - f.radius * f.radius).sqrt()));
    }
    let mut points: Vec<Point3> = poly.vertices().iter().map(|p| Point3::new(p.x, p.y, 0.0)).collect();
    points.extend_from_slice(&tops);
    Ok(Lift { tops, points })
}

/// An edge of `G_Φ`: an arc of `S(a,1) ∩ S(b,1)` running from `ends[0]` to
/// `ends[1]`, counterclockwise about `b - a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub ends: [usize; 2],
    pub centers: [usize; 2],
    pub arc: Arc3,
}

impl Edge {
    pub fn touches(&self, v: usize) -> bool {
        self.ends.contains(&v)
    }

    pub fn other_end(&self, v: usize) -> usize {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

/// One side of a face boundary: an edge traversed along (`forward`) or
/// against its arc direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Side {
    pub edge: usize,
    pub forward: bool,
}

/// Face `τ(center)`: the part of `S(center, 1)` on the boundary, bounded
/// counterclockwise (seen from outside) by `boundary`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub center: usize,
    pub boundary: Vec<Side>,
}

/// A Reuleaux polyhedron. Vertex `i` is center `i` and `tau[i]` is the face
/// dual to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuleauxPolyhedron {
    pub centers: Vec<Point3>,
    pub vertices: Vec<Point3>,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
    pub tau: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClass {
    Regular(usize),
    OneSingular(usize),
    ZeroSingular(usize),
    NotOnBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterGraph {
    pub nodes: Vec<Point3>,
    pub edges: Vec<(usize, usize)>,
}

impl DiameterGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v || e.1 == v).count()
    }

    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }
}

/// Unit-distance pairs of `points`.
pub fn diameter_graph(points: &[Point3], tol: &Tolerance) -> DiameterGraph {
    let mut edges = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if tol.is_unit((points[i] - points[j]).norm()) {
                edges.push((i, j));
            }
        }
    }
    DiameterGraph {
        nodes: points.to_vec(),
        edges,
    }
}

fn check_metric_candidate(x: &[Point3], tol: &Tolerance) -> Result<()> {
    if x.len() < 4 {
        return Err(Error::MetricEmbeddingViolation {
            witness: (0..x.len()).collect(),
            detail: format!("{} centers, at least 4 needed", x.len()),
        });
    }
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let d = (x[i] - x[j]).norm();
            if d > 1.0 + tol.eq {
                return Err(Error::MetricEmbeddingViolation {
                    witness: vec![i, j],
                    detail: format!("distance {d} exceeds 1"),
                });
            }
        }
    }
    let g = diameter_graph(x, tol);
    for v in 0..x.len() {
        let deg = g.degree(v);
        if deg < 3 {
            return Err(Error::MetricEmbeddingViolation {
                witness: vec![v],
                detail: format!("center has {deg} diameters, at least 3 needed"),
            });
        }
    }
    Ok(())
}

fn inside_all(x: &[Point3], p: &Point3, slack: f64) -> bool {
    x.iter().all(|c| (p - c).norm() <= 1.0 + slack)
}

/// Singular points of `∩ B(x,1)` of order 0, each matched to its center.
fn extract_vertices(x: &[Point3], tol: &Tolerance) -> Result<Vec<Point3>> {
    let m = x.len();
    let mut found: Vec<Option<Point3>> = vec![None; m];
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                for p in unit_sphere_triple(&x[i], &x[j], &x[k]) {
                    if !inside_all(x, &p, tol.eq) {
                        continue;
                    }
                    let (best, dist) = x
                        .iter()
                        .enumerate()
                        .map(|(v, c)| (v, (p - c).norm()))
                        .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                    if dist > VERTEX_MATCH {
                        return Err(Error::MetricEmbeddingViolation {
                            witness: vec![i, j, k],
                            detail: format!("boundary vertex {p:?} is {dist:e} from every center"),
                        });
                    }
                    found[best].get_or_insert(p);
                }
            }
        }
    }
    found
        .into_iter()
        .enumerate()
        .map(|(v, p)| {
            p.ok_or_else(|| Error::MetricEmbeddingViolation {
                witness: vec![v],
                detail: "center is not a vertex of the ball polyhedron".into(),
            })
        })
        .collect()
}

/// Center, radius, axis and angular runs of a clipped circle.
type ClippedCircle = (Point3, f64, Vector3, Vec<(f64, f64)>);

/// Feasible angular runs `(start, sweep)` of the circle `S(a,1) ∩ S(b,1)`.
fn clip_circle(x: &[Point3], a: usize, b: usize) -> Option<ClippedCircle> {
    let ab = x[b] - x[a];
    let d = ab.norm();
    if !(1e-12..2.0).contains(&d) {
        return None;
    }
    let m = Point3::from((x[a].coords + x[b].coords) / 2.0);
    let rho = (1.0 - d * d / 4.0).sqrt();
    let normal = ab / d;
    let (e1, e2) = plane_basis(&normal);

    // other center c is satisfied where R cos(φ - ψ) ≤ K
    let mut cons = Vec::new();
    let mut cuts = Vec::new();
    for (c, pc) in x.iter().enumerate() {
        if c == a || c == b {
            continue;
        }
        let v = m - pc;
        let (ca, cb) = (v.dot(&e1), v.dot(&e2));
        let r = ca.hypot(cb);
        let k = (1.0 - v.norm_squared() - rho * rho) / (2.0 * rho);
        if k >= r {
            continue;
        }
        if k < -r {
            return Some((m, rho, normal, Vec::new()));
        }
        let psi = cb.atan2(ca);
        let half = (k / r).clamp(-1.0, 1.0).acos();
        cuts.push(normalize_angle(psi - half));
        cuts.push(normalize_angle(psi + half));
        cons.push((ca, cb, k));
    }
    let feasible = |phi: f64| {
        let (c, s) = (phi.cos(), phi.sin());
        cons.iter().all(|&(ca, cb, k)| ca * c + cb * s <= k + CLIP_SLACK)
    };
    if cuts.is_empty() {
        return Some((m, rho, normal, vec![(0.0, TAU)]));
    }
    cuts.sort_by(f64::total_cmp);
    let q = cuts.len();
    let pieces: Vec<(f64, f64, bool)> = (0..q)
        .map(|i| {
            let lo = cuts[i];
            let hi = if i + 1 < q { cuts[i + 1] } else { cuts[0] + TAU };
            (lo, hi - lo, feasible((lo + hi) / 2.0))
        })
        .collect();
    // merge cyclically, starting after an infeasible piece
    let mut runs: Vec<(f64, f64)> = Vec::new();
    let Some(first_bad) = pieces.iter().position(|p| !p.2) else {
        return Some((m, rho, normal, vec![(0.0, TAU)]));
    };
    let mut current: Option<(f64, f64)> = None;
    for step in 1..=q {
        let (lo, len, ok) = pieces[(first_bad + step) % q];
        if ok {
            current = Some(match current {
                Some((s, w)) => (s, w + len),
                None => (lo, len),
            });
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    if let Some(run) = current {
        runs.push(run);
    }
    Some((m, rho, normal, runs))
}

fn nearest_vertex(vertices: &[Point3], p: &Point3) -> (usize, f64) {
    vertices
        .iter()
        .enumerate()
        .map(|(v, q)| (v, (p - q).norm()))
        .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

fn extract_edges(x: &[Point3]) -> Result<Vec<Edge>> {
    let mut edges = Vec::new();
    for a in 0..x.len() {
        for b in a + 1..x.len() {
            let Some((m, rho, normal, runs)) = clip_circle(x, a, b) else {
                continue;
            };
            let runs: Vec<_> = runs.into_iter().filter(|r| r.1 > MIN_EDGE_SWEEP).collect();
            if runs.len() > 1 {
                return Err(Error::NotStandard {
                    witness: vec![a, b],
                    detail: format!("faces meet in {} separate arcs", runs.len()),
                });
            }
            let Some(&(start, sweep)) = runs.first() else {
                continue;
            };
            if sweep >= TAU - MIN_EDGE_SWEEP {
                return Err(Error::NotStandard {
                    witness: vec![a, b],
                    detail: "faces meet in a full circle".into(),
                });
            }
            let (e1, e2) = plane_basis(&normal);
            let at = |phi: f64| m + (e1 * phi.cos() + e2 * phi.sin()) * rho;
            let (p0, p1) = (at(start), at(start + sweep));
            let (v0, d0) = nearest_vertex(x, &p0);
            let (v1, d1) = nearest_vertex(x, &p1);
            if d0 > ENDPOINT_SNAP || d1 > ENDPOINT_SNAP || v0 == v1 {
                return Err(Error::NotStandard {
                    witness: vec![a, b],
                    detail: format!("arc endpoints miss the vertices ({d0:e}, {d1:e})"),
                });
            }
            edges.push(Edge {
                ends: [v0, v1],
                centers: [a, b],
                arc: Arc3::through(m, normal, &x[v0], &x[v1]),
            });
        }
    }
    Ok(edges)
}

/// Chains the edges of face `τ(c)` into one counterclockwise loop.
fn build_face(x: &[Point3], edges: &[Edge], c: usize) -> Result<Face> {
    let mine: Vec<usize> = (0..edges.len()).filter(|&e| edges[e].centers.contains(&c)).collect();
    if mine.len() < 3 {
        return Err(Error::NotStandard {
            witness: vec![c],
            detail: format!("face has {} edges", mine.len()),
        });
    }
    let mut at_vertex: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &mine {
        for v in edges[e].ends {
            at_vertex.entry(v).or_default().push(e);
        }
    }
    if let Some((v, list)) = at_vertex.iter().find(|(_, l)| l.len() != 2) {
        return Err(Error::NotStandard {
            witness: vec![c, *v],
            detail: format!("vertex meets {} edges of the face", list.len()),
        });
    }
    let mut boundary = vec![Side {
        edge: mine[0],
        forward: true,
    }];
    let mut tip = edges[mine[0]].ends[1];
    while tip != edges[mine[0]].ends[0] {
        let last = boundary.last().unwrap().edge;
        let next = at_vertex[&tip].iter().copied().find(|&e| e != last).unwrap();
        if boundary.iter().any(|s| s.edge == next) {
            break;
        }
        let forward = edges[next].ends[0] == tip;
        tip = edges[next].other_end(tip);
        boundary.push(Side { edge: next, forward });
    }
    if boundary.len() != mine.len() {
        return Err(Error::NotStandard {
            witness: vec![c],
            detail: "face boundary is not a single loop".into(),
        });
    }

    let samples = face_loop_samples(edges, &boundary, 8);
    let mean = samples.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / samples.len() as f64;
    let outward = Point3::from(mean) - x[c];
    if newell(&samples).dot(&outward) < 0.0 {
        boundary.reverse();
        for s in &mut boundary {
            s.forward = !s.forward;
        }
    }
    Ok(Face { center: c, boundary })
}

/// Points along a face loop, `per_edge` per side, following the sides' directions.
pub fn face_loop_samples(edges: &[Edge], boundary: &[Side], per_edge: usize) -> Vec<Point3> {
    let mut pts = Vec::new();
    for s in boundary {
        let arc = &edges[s.edge].arc;
        for k in 0..per_edge {
            let t = k as f64 / per_edge as f64;
            pts.push(arc.point_at(if s.forward { t } else { 1.0 - t }));
        }
    }
    pts
}

/// Vector area of a closed polyline.
pub fn newell(pts: &[Point3]) -> Vector3 {
    let m = pts.len();
    (0..m).fold(Vector3::zeros(), |acc, i| acc + pts[i].coords.cross(&pts[(i + 1) % m].coords)) / 2.0
}

impl ReuleauxPolyhedron {
    /// Builds `∩_{x ∈ X} B(x, 1)` and checks every structural invariant.
    pub fn build(x: &[Point3], tol: &Tolerance) -> Result<Self> {
        check_metric_candidate(x, tol)?;
        let vertices = extract_vertices(x, tol)?;
        let edges = extract_edges(x)?;
        let faces = (0..x.len())
            .map(|c| build_face(x, &edges, c))
            .collect::<Result<Vec<_>>>()?;
        let phi = Self {
            centers: x.to_vec(),
            vertices,
            edges,
            faces,
            tau: (0..x.len()).collect(),
        };
        let report = phi.validate(tol);
        if let Some(bad) = report.failures().next() {
            let detail = format!("{}: {}", bad.name, bad.detail.clone().unwrap_or_default());
            let witness = phi.witness_for(&bad.name, tol);
            return Err(match bad.name.as_str() {
                "involution" => Error::NotInvolutive { witness, detail },
                "metric_embedding" | "vertex_set" | "incidence" => {
                    Error::MetricEmbeddingViolation { witness, detail }
                }
                _ => Error::NotStandard { witness, detail },
            });
        }
        Ok(phi)
    }

    /// The whole lift pipeline: diagram, tops, ball polyhedron.
    pub fn from_polygon(poly: &ReuleauxPolygon, tol: &Tolerance) -> Result<Self> {
        let diagram = crate::fpvd::farthest_point_diagram(poly, tol)?;
        Self::build(&lift(poly, &diagram)?.points, tol)
    }

    pub fn n_vertices(&self) -> usize {
        self.centers.len()
    }

    /// Vertices of face `τ(x)` in boundary order.
    pub fn face_vertices(&self, face: usize) -> Vec<usize> {
        self.faces[face]
            .boundary
            .iter()
            .map(|s| {
                let e = &self.edges[s.edge];
                if s.forward {
                    e.ends[0]
                } else {
                    e.ends[1]
                }
            })
            .collect()
    }

    pub fn contains(&self, p: &Point3, slack: f64) -> bool {
        inside_all(&self.centers, p, slack)
    }

    /// Largest `|p - x| - 1` over centers.
    pub fn excess(&self, p: &Point3) -> f64 {
        self.centers
            .iter()
            .map(|c| (p - c).norm() - 1.0)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Edge adjacency of `G_Φ`.
    pub fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.n_vertices()];
        for e in &self.edges {
            adj[e.ends[0]].insert(e.ends[1]);
            adj[e.ends[1]].insert(e.ends[0]);
        }
        adj
    }

    pub fn edge_between_centers(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.iter().position(|e| e.centers == key)
    }

    pub fn classify(&self, p: &Point3, tol: &Tolerance) -> BoundaryClass {
        if !self.contains(p, tol.eq) {
            return BoundaryClass::NotOnBoundary;
        }
        let active: Vec<usize> = (0..self.centers.len())
            .filter(|&c| tol.is_unit((p - self.centers[c]).norm()))
            .collect();
        match active.len() {
            0 => BoundaryClass::NotOnBoundary,
            1 => BoundaryClass::Regular(active[0]),
            _ => {
                let cols: Vec<Vector3> = active.iter().map(|&c| self.centers[c] - p).collect();
                let m = nalgebra::Matrix3xX::from_columns(&cols);
                if m.rank(1e-6) >= 3 {
                    return BoundaryClass::ZeroSingular(nearest_vertex(&self.vertices, p).0);
                }
                for (i, &a) in active.iter().enumerate() {
                    for &b in &active[i + 1..] {
                        if let Some(e) = self.edge_between_centers(a, b) {
                            return BoundaryClass::OneSingular(e);
                        }
                    }
                }
                BoundaryClass::NotOnBoundary
            }
        }
    }

    /// Point on face `τ(x)` along unit direction `u` from `x`, if it is on the face.
    pub fn face_point(&self, x: usize, u: &Vector3, tol: &Tolerance) -> Option<Point3> {
        let p = self.centers[x] + u.normalize();
        self.contains(&p, tol.eq).then_some(p)
    }

    fn witness_for(&self, check: &str, tol: &Tolerance) -> Vec<usize> {
        let face_sets: Vec<BTreeSet<usize>> =
            (0..self.faces.len()).map(|f| self.face_vertices(f).into_iter().collect()).collect();
        match check {
            "involution" | "metric_embedding" | "lattice_isomorphism" => {
                for x in 0..self.n_vertices() {
                    for y in 0..self.n_vertices() {
                        let unit = x != y && tol.is_unit((self.centers[x] - self.centers[y]).norm());
                        if face_sets[y].contains(&x) != face_sets[x].contains(&y)
                            || face_sets[y].contains(&x) != unit
                        {
                            return vec![x, y];
                        }
                    }
                }
                Vec::new()
            }
            _ => Vec::new(),
        }
    }

    /// All structural and metric invariants with worst residuals.
    pub fn validate(&self, tol: &Tolerance) -> Report {
        let mut r = Report::new();
        let nv = self.n_vertices();
        let ne = self.edges.len();
        let nf = self.faces.len();

        let vres = self
            .vertices
            .iter()
            .zip(&self.centers)
            .map(|(v, c)| (v - c).norm())
            .fold(0.0, f64::max);
        r.push("vertex_set", self.vertices.len() == nv && vres <= VERTEX_MATCH, vres);

        let min_inc = (0..nv)
            .map(|v| {
                (0..nv)
                    .filter(|&c| tol.is_unit((self.centers[v] - self.centers[c]).norm()))
                    .count()
            })
            .min()
            .unwrap_or(0);
        r.push_detail("incidence", min_inc >= 3, 0.0, format!("min spheres per vertex {min_inc}"));

        let mut geo: f64 = 0.0;
        for e in &self.edges {
            let (a, b) = (self.centers[e.centers[0]], self.centers[e.centers[1]]);
            let mid = Point3::from((a.coords + b.coords) / 2.0);
            geo = geo
                .max((e.arc.center - mid).norm())
                .max(e.arc.normal.cross(&(b - a).normalize()).norm());
            for k in 0..=16 {
                let p = e.arc.point_at(k as f64 / 16.0);
                geo = geo
                    .max(((p - a).norm() - 1.0).abs())
                    .max(((p - b).norm() - 1.0).abs())
                    .max(self.excess(&p).max(0.0));
            }
            geo = geo
                .max((e.arc.start_point() - self.centers[e.ends[0]]).norm())
                .max((e.arc.end_point() - self.centers[e.ends[1]]).norm());
        }
        r.push("edge_geometry", geo <= tol.eq, geo);

        r.push_detail(
            "edge_count",
            ne + 2 == 2 * nv,
            0.0,
            format!("|E| = {ne}, 2|V| - 2 = {}", 2 * nv - 2),
        );
        let euler = nv as i64 - ne as i64 + nf as i64;
        r.push_detail("euler", euler == 2, 0.0, format!("{nv} - {ne} + {nf} = {euler}"));

        let mut pairing = true;
        for (ei, e) in self.edges.iter().enumerate() {
            let uses: Vec<bool> = self
                .faces
                .iter()
                .flat_map(|f| f.boundary.iter().filter(|s| s.edge == ei).map(|s| s.forward))
                .collect();
            pairing &= uses.len() == 2 && uses[0] != uses[1];
            pairing &= e.centers.iter().all(|&c| self.faces[self.tau[c]].center == c);
        }
        r.push("face_pairing", pairing, 0.0);

        let face_sets: Vec<BTreeSet<usize>> =
            (0..nf).map(|f| self.face_vertices(f).into_iter().collect()).collect();
        let mut standard = true;
        let mut std_detail = String::new();
        for f in 0..nf {
            for g in f + 1..nf {
                let common: BTreeSet<usize> = face_sets[f].intersection(&face_sets[g]).copied().collect();
                let shared = self.edge_between_centers(self.faces[f].center, self.faces[g].center);
                let ok = match shared {
                    Some(e) => common == self.edges[e].ends.iter().copied().collect(),
                    None => common.len() <= 1,
                };
                if !ok && standard {
                    std_detail = format!("faces {f} and {g} meet in {common:?}");
                }
                standard &= ok;
            }
        }
        r.push_detail("standard", standard, 0.0, std_detail);

        let mut involutive = self.tau.len() == nv && self.faces.len() == nv;
        let mut metric_res: f64 = 0.0;
        let mut metric_ok = true;
        for x in 0..nv {
            for y in 0..nv {
                if x == y {
                    continue;
                }
                let in_fy = face_sets[self.tau[y]].contains(&x);
                let in_fx = face_sets[self.tau[x]].contains(&y);
                involutive &= in_fy == in_fx;
                let d = (self.centers[x] - self.centers[y]).norm();
                metric_res = metric_res.max((d - 1.0).max(0.0));
                if in_fy {
                    metric_res = metric_res.max((d - 1.0).abs());
                }
                metric_ok &= d <= 1.0 + tol.eq && in_fy == tol.is_unit(d);
            }
        }
        r.push("involution", involutive, 0.0);
        r.push("metric_embedding", metric_ok, metric_res);

        let conn = self.three_connected();
        r.push_detail("three_connected", conn.is_none(), 0.0, conn.unwrap_or_default());

        let dg = diameter_graph(&self.centers, tol);
        let lattice = (0..nv).all(|x| dg.neighbors(x) == face_sets[self.tau[x]]);
        r.push("lattice_isomorphism", lattice, 0.0);
        let adj = self.adjacency();
        let degrees = (0..nv).all(|x| dg.degree(x) == adj[x].len());
        r.push_detail(
            "diameter_count",
            dg.edges.len() == ne && degrees,
            0.0,
            format!("{} diameters, {ne} edges", dg.edges.len()),
        );
        r
    }

    /// `None` if removing any two vertices leaves `G_Φ` connected.
    pub fn three_connected(&self) -> Option<String> {
        let nv = self.n_vertices();
        if nv < 4 {
            return Some(format!("only {nv} vertices"));
        }
        let adj = self.adjacency();
        for a in 0..nv {
            for b in a..nv {
                let alive = |v: usize| v != a && v != b;
                let start = (0..nv).find(|&v| alive(v)).unwrap();
                let mut seen = vec![false; nv];
                seen[start] = true;
                let mut queue = VecDeque::from([start]);
                let mut count = 1;
                while let Some(v) = queue.pop_front() {
                    for &w in &adj[v] {
                        if alive(w) && !seen[w] {
                            seen[w] = true;
                            count += 1;
                            queue.push_back(w);
                        }
                    }
                }
                let expect = if a == b { nv - 1 } else { nv - 2 };
                if count != expect {
                    return Some(format!("removing {a} and {b} disconnects the graph"));
                }
            }
        }
        None
    }

    /// Graphviz export of `G_Φ`; each node carries its dual face index.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G_phi {\n");
        for (v, p) in self.centers.iter().enumerate() {
            let _ = writeln!(
                s,
                "  v{v} [tau={}, pos=\"{},{},{}\"];",
                self.tau[v], p.x, p.y, p.z
            );
        }
        for (i, e) in self.edges.iter().enumerate() {
            let _ = writeln!(
                s,
                "  v{} -- v{} [id={i}, dual=\"{},{}\"];",
                e.ends[0], e.ends[1], e.centers[0], e.centers[1]
            );
        }
        s.push_str("}\n");
        s
    }
}

/// Top face centers project into the matching farthest-point cells: the top
/// `(c_T, ·)` lies on face `τ(p_i)` exactly when `c_T` lies in the cell of `p_i`.
pub fn cell_projection_check(phi: &ReuleauxPolyhedron, diagram: &FarthestPointDiagram, tol: &Tolerance) -> Report {
    let n = diagram.polygon.n();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let face: BTreeSet<usize> = phi.face_vertices(phi.tau[i]).into_iter().collect();
        for (f, t) in diagram.faces.iter().enumerate() {
            let on_face = face.contains(&(n + f));
            let pi = diagram.polygon.vertex(i);
            let di = (t.center - pi).norm();
            let far = diagram
                .polygon
                .vertices()
                .iter()
                .map(|p| (t.center - p).norm())
                .fold(0.0, f64::max);
            let in_cell = di >= far - tol.eq;
            if in_cell {
                worst = worst.max(far - di);
            }
            ok &= on_face == in_cell;
        }
    }
    let mut r = Report::new();
    r.push("cell_projection", ok, worst);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpvd::farthest_point_diagram;
    use crate::reuleaux::{make_random, make_regular};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    pub(crate) fn unit_tetrahedron() -> Vec<Point3> {
        let h = (2.0f64 / 3.0).sqrt();
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 3f64.sqrt() / 2.0, 0.0),
            Point3::new(0.5, 3f64.sqrt() / 6.0, h),
        ]
    }

    fn lifted(poly: &ReuleauxPolygon) -> Vec<Point3> {
        let d = farthest_point_diagram(poly, &tol()).unwrap();
        lift(poly, &d).unwrap().points
    }

    #[test]
    fn lift_of_triangle_is_regular_tetrahedron() {
        let pts = lifted(&make_regular(3).unwrap());
        assert_eq!(pts.len(), 4);
        assert_abs_diff_eq!(pts[3].z, (2.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        for i in 0..4 {
            for j in i + 1..4 {
                assert_abs_diff_eq!((pts[i] - pts[j]).norm(), 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lift_of_regular_pentagon() {
        let pts = lifted(&make_regular(5).unwrap());
        assert_eq!(pts.len(), 6);
        assert_abs_diff_eq!(pts[5].z, 0.8506508, epsilon = 1e-7);
    }

    #[test]
    fn lift_rejects_large_disk() {
        let poly = make_regular(3).unwrap();
        let mut d = farthest_point_diagram(&poly, &tol()).unwrap();
        d.faces[0].radius = 1.0;
        assert!(matches!(lift(&poly, &d), Err(Error::LiftImaginary { face: 0, .. })));
    }

    #[test]
    fn tetrahedron_is_k4() {
        let phi = ReuleauxPolyhedron::build(&unit_tetrahedron(), &tol()).unwrap();
        assert_eq!((phi.vertices.len(), phi.edges.len(), phi.faces.len()), (4, 6, 4));
        let r = phi.validate(&tol());
        assert!(r.pass(), "{r}");
        for f in 0..4 {
            assert_eq!(phi.face_vertices(f).len(), 3);
        }
    }

    #[test]
    fn regular_pentagon_gives_wheel() {
        let phi = ReuleauxPolyhedron::build(&lifted(&make_regular(5).unwrap()), &tol()).unwrap();
        assert_eq!((phi.vertices.len(), phi.edges.len(), phi.faces.len()), (6, 10, 6));
        let adj = phi.adjacency();
        assert_eq!(adj[5].len(), 5);
        assert!((0..5).all(|v| adj[v].len() == 3));
    }

    #[test]
    fn generic_pentagon_counts() {
        let phi = ReuleauxPolyhedron::build(&lifted(&make_random(5, 42).unwrap()), &tol()).unwrap();
        assert_eq!((phi.vertices.len(), phi.edges.len(), phi.faces.len()), (8, 14, 8));
    }

    #[test]
    fn random_lifts_build() {
        for n in [3, 5, 7, 9, 11] {
            for seed in 0..5 {
                let poly = make_random(n, seed).unwrap();
                let d = farthest_point_diagram(&poly, &tol()).unwrap();
                let x = lift(&poly, &d).unwrap().points;
                let phi = ReuleauxPolyhedron::build(&x, &tol())
                    .unwrap_or_else(|e| panic!("n={n} seed={seed}: {e}"));
                assert_eq!(phi.edges.len(), 2 * x.len() - 2);
                assert!(cell_projection_check(&phi, &d, &tol()).pass());
            }
        }
    }

    #[test]
    fn faces_are_counterclockwise_from_outside() {
        let phi = ReuleauxPolyhedron::build(&lifted(&make_random(7, 4).unwrap()), &tol()).unwrap();
        for f in &phi.faces {
            let pts = face_loop_samples(&phi.edges, &f.boundary, 8);
            let mean = pts.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / pts.len() as f64;
            let out = Point3::from(mean) - phi.centers[f.center];
            assert!(newell(&pts).dot(&out) > 0.0);
        }
    }

    #[test]
    fn degree_two_center_rejected() {
        let mut x = unit_tetrahedron();
        x.push(Point3::new(0.5, 0.3, 0.2));
        assert!(matches!(
            ReuleauxPolyhedron::build(&x, &tol()),
            Err(Error::MetricEmbeddingViolation { .. })
        ));
    }

    #[test]
    fn far_pair_rejected() {
        let mut x = unit_tetrahedron();
        x[3].z += 0.1;
        match ReuleauxPolyhedron::build(&x, &tol()) {
            Err(Error::MetricEmbeddingViolation { witness, .. }) => assert!(witness.contains(&3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classify_tetrahedron_points() {
        let phi = ReuleauxPolyhedron::build(&unit_tetrahedron(), &tol()).unwrap();
        for v in 0..4 {
            assert_eq!(phi.classify(&phi.centers[v], &tol()), BoundaryClass::ZeroSingular(v));
        }
        for (i, e) in phi.edges.iter().enumerate() {
            assert_eq!(phi.classify(&e.arc.midpoint(), &tol()), BoundaryClass::OneSingular(i));
        }
        // face τ(3) is the bottom face; its center direction is straight down
        let p = phi.face_point(3, &-Vector3::z(), &tol()).unwrap();
        assert_eq!(phi.classify(&p, &tol()), BoundaryClass::Regular(3));
        assert_eq!(phi.classify(&Point3::new(0.5, 0.3, 0.2), &tol()), BoundaryClass::NotOnBoundary);
    }

    #[test]
    fn diameter_graph_examples() {
        assert_eq!(diameter_graph(&unit_tetrahedron(), &tol()).edges.len(), 6);
        assert_eq!(diameter_graph(&lifted(&make_regular(5).unwrap()), &tol()).edges.len(), 10);
        let two = [Point3::origin(), Point3::new(1.0, 0.0, 0.0)];
        assert_eq!(diameter_graph(&two, &tol()).edges.len(), 1);
    }

    #[test]
    fn broken_pairing_fails_validation() {
        let mut phi = ReuleauxPolyhedron::build(&unit_tetrahedron(), &tol()).unwrap();
        phi.faces[0].boundary[0].forward ^= true;
        let r = phi.validate(&tol());
        assert!(!r.get("face_pairing").unwrap().pass);
    }

    #[test]
    fn json_round_trip() {
        let phi = ReuleauxPolyhedron::build(&lifted(&make_random(5, 1).unwrap()), &tol()).unwrap();
        let s = serde_json::to_string(&phi).unwrap();
        let back: ReuleauxPolyhedron = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
    }

    #[test]
    fn dot_has_tau_attributes() {
        let phi = ReuleauxPolyhedron::build(&unit_tetrahedron(), &tol()).unwrap();
        let dot = phi.to_dot();
        assert_eq!(dot.matches("tau=").count(), 4);
        assert_eq!(dot.matches(" -- ").count(), 6);
    }
}
