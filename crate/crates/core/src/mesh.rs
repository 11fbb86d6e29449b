//! Watertight tessellation of Meissner solids and Reuleaux polyhedra.
//!
//! Every boundary curve is sampled once with `2^level` segments and the
//! samples are shared by index between the two patches it separates, so
//! watertightness holds by construction. Caps are fans of slerped rows from
//! an apex; wedges are `(s, t)` grids collapsing at the rounded edge's ends.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::ballpoly::ReuleauxPolyhedron;
use crate::error::{Error, Result};
use crate::geom::{slerp, ArcFrame, Point3, Tolerance, Vector3};
use crate::surgery::{perform_partial_surgery, Curve, CurveSide, MeissnerSolid, Wedge};

/// Surface patch a triangle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Patch {
    /// Spherical cap on `S(x, 1)` for center index `x`.
    Cap(usize),
    /// Wedge of dual pair `p`.
    Wedge(usize),
    /// Triangle of a plain sphere mesh.
    Sphere,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[usize; 3]>,
    pub provenance: Vec<Patch>,
}

fn edge_uses(triangles: &[[usize; 3]]) -> HashMap<(usize, usize), (usize, usize)> {
    // undirected edge → (uses as a→b with a<b, uses as b→a)
    let mut uses: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let e = uses.entry((a.min(b), a.max(b))).or_default();
            if a < b {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    uses
}

impl TriangleMesh {
    /// Every undirected edge is shared by exactly two triangles.
    pub fn check_watertight(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::NotWatertight("mesh has no triangles".into()));
        }
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= self.vertices.len())) {
            return Err(Error::NotWatertight(format!("triangle {t:?} references a missing vertex")));
        }
        for (e, (f, b)) in edge_uses(&self.triangles) {
            if f + b != 2 {
                return Err(Error::NotWatertight(format!("edge {e:?} is used by {} triangles", f + b)));
            }
        }
        Ok(())
    }

    /// Each shared edge is traversed once in each direction.
    pub fn orientation_consistent(&self) -> bool {
        edge_uses(&self.triangles).values().all(|&(f, b)| f == 1 && b == 1)
    }

    pub fn edge_count(&self) -> usize {
        edge_uses(&self.triangles).len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        let used = {
            let mut seen = vec![false; self.vertices.len()];
            for t in &self.triangles {
                for &i in t {
                    seen[i] = true;
                }
            }
            seen.iter().filter(|s| **s).count()
        };
        used as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Largest distance between two vertices.
    pub fn vertex_diameter(&self) -> f64 {
        max_distance(&self.vertices)
    }

    /// Largest distance from each query point to the nearest triangle.
    pub fn max_distance_to(&self, points: &[Point3]) -> f64 {
        let cell = 0.05;
        let key = |p: &Point3| {
            (
                (p.x / cell).floor() as i64,
                (p.y / cell).floor() as i64,
                (p.z / cell).floor() as i64,
            )
        };
        let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            let mut keys: Vec<_> = t.iter().map(|&i| key(&self.vertices[i])).collect();
            keys.sort_unstable();
            keys.dedup();
            for k in keys {
                grid.entry(k).or_default().push(ti);
            }
        }
        let tri_dist = |ti: usize, p: &Point3| {
            let [a, b, c] = self.triangles[ti].map(|i| self.vertices[i]);
            (closest_on_triangle(p, &a, &b, &c) - p).norm()
        };
        points
            .iter()
            .map(|p| {
                let (kx, ky, kz) = key(p);
                let mut best = f64::INFINITY;
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        for dz in -1..=1 {
                            if let Some(list) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                                for &ti in list {
                                    best = best.min(tri_dist(ti, p));
                                }
                            }
                        }
                    }
                }
                if best > cell {
                    best = (0..self.triangles.len()).map(|ti| tri_dist(ti, p)).fold(f64::INFINITY, f64::min);
                }
                best
            })
            .fold(0.0, f64::max)
    }
}

/// Closest point of triangle `abc` to `p`.
pub fn closest_on_triangle(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Exact maximum pairwise distance, pruned with a coarse grid of blocks.
pub fn max_distance(pts: &[Point3]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let cell = 0.1;
    let mut blocks: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        let k = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64);
        blocks.entry(k).or_default().push(i);
    }
    let mut keys: Vec<_> = blocks.keys().copied().collect();
    keys.sort_unstable();
    let spheres: Vec<(Point3, f64)> = keys
        .iter()
        .map(|k| {
            let list = &blocks[k];
            let c = Point3::from(list.iter().map(|&i| pts[i].coords).sum::<Vector3>() / list.len() as f64);
            let r = list.iter().map(|&i| (pts[i] - c).norm()).fold(0.0, f64::max);
            (c, r)
        })
        .collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..keys.len() {
        for j in i..keys.len() {
            let bound = (spheres[i].0 - spheres[j].0).norm() + spheres[i].1 + spheres[j].1;
            pairs.push((bound, i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best2: f64 = 0.0;
    for (bound, i, j) in pairs {
        if bound * bound < best2 {
            break;
        }
        let (bi, bj) = (&blocks[&keys[i]], &blocks[&keys[j]]);
        for &p in bi {
            for &q in bj {
                best2 = best2.max((pts[p] - pts[q]).norm_squared());
            }
        }
    }
    best2.sqrt()
}

struct Builder<'a> {
    m: &'a MeissnerSolid,
    segments: usize,
    mesh: TriangleMesh,
    curves: HashMap<Curve, Vec<usize>>,
}

impl<'a> Builder<'a> {
    fn push(&mut self, p: Point3) -> usize {
        self.mesh.vertices.push(p);
        self.mesh.vertices.len() - 1
    }

    /// Sample indices along a curve in its own direction, endpoints included.
    fn curve(&mut self, c: Curve) -> Vec<usize> {
        if let Some(v) = self.curves.get(&c) {
            return v.clone();
        }
        let (start, end) = match c {
            Curve::Edge { edge } => {
                let e = &self.m.base.edges[edge];
                (e.ends[0], e.ends[1])
            }
            Curve::Geodesic { wedge, .. } => (self.m.wedges[wedge].x, self.m.wedges[wedge].y),
        };
        let arc = self.m.curve_arc(&c);
        let mut idx = vec![start];
        for k in 1..self.segments {
            let p = arc.point_at(k as f64 / self.segments as f64);
            idx.push(self.push(p));
        }
        idx.push(end);
        self.curves.insert(c, idx.clone());
        idx
    }

    fn side_samples(&mut self, s: &CurveSide) -> Vec<usize> {
        let mut idx = self.curve(s.curve);
        if !s.forward {
            idx.reverse();
        }
        idx
    }

    fn triangle(&mut self, t: [usize; 3], reference: &Vector3, patch: Patch) {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return;
        }
        let [a, b, c] = t.map(|i| self.mesh.vertices[i]);
        let n = (b - a).cross(&(c - a));
        let tri = if n.dot(reference) >= 0.0 { t } else { [t[0], t[2], t[1]] };
        self.mesh.triangles.push(tri);
        self.mesh.provenance.push(patch);
    }

    fn cap(&mut self, center: usize, boundary: &[CurveSide]) {
        let x = self.m.vertex(center);
        let mut ring: Vec<usize> = Vec::new();
        for s in boundary {
            let samples = self.side_samples(s);
            ring.extend_from_slice(&samples[..samples.len() - 1]);
        }
        let dirs: Vec<Vector3> = ring.iter().map(|&i| (self.mesh.vertices[i] - x).normalize()).collect();
        let apex_dir = dirs.iter().sum::<Vector3>().normalize();
        let apex = self.push(x + apex_dir);
        let rows = self.segments;
        let l = ring.len();
        // rows[r][j]: point r/rows of the way from the apex to ring[j]
        let mut grid: Vec<Vec<usize>> = vec![vec![apex; l]];
        for r in 1..rows {
            let t = r as f64 / rows as f64;
            let row = (0..l).map(|j| self.push(x + slerp(&apex_dir, &dirs[j], t))).collect();
            grid.push(row);
        }
        grid.push(ring);
        for r in 0..rows {
            for j in 0..l {
                let k = (j + 1) % l;
                let (a, b, c, d) = (grid[r][j], grid[r][k], grid[r + 1][j], grid[r + 1][k]);
                let mid = |s: &Self, ids: [usize; 3]| {
                    ids.iter().map(|&i| s.mesh.vertices[i].coords).sum::<Vector3>() / 3.0 - x.coords
                };
                let t1 = [a, c, d];
                let ref1 = mid(self, t1);
                self.triangle(t1, &ref1, Patch::Cap(center));
                let t2 = [a, d, b];
                let ref2 = mid(self, t2);
                self.triangle(t2, &ref2, Patch::Cap(center));
            }
        }
    }

    fn wedge(&mut self, wi: usize, w: &Wedge) {
        let m = self.segments;
        let left = self.curve(Curve::Geodesic { wedge: wi, at: w.a });
        let right = self.curve(Curve::Geodesic { wedge: wi, at: w.b });
        let mut cols: Vec<Vec<usize>> = vec![left];
        for i in 1..m {
            let s = i as f64 / m as f64;
            let mut col = vec![w.x];
            for j in 1..m {
                let p = self.m.wedge_point(w, s, j as f64 / m as f64);
                col.push(self.push(p));
            }
            col.push(w.y);
            cols.push(col);
        }
        cols.push(right);
        for i in 0..m {
            let c = w.dual_arc.point_at((i as f64 + 0.5) / m as f64);
            for j in 0..m {
                let (a, b, cc, d) = (cols[i][j], cols[i + 1][j], cols[i + 1][j + 1], cols[i][j + 1]);
                for t in [[a, b, cc], [a, cc, d]] {
                    let centroid = t.iter().map(|&k| self.mesh.vertices[k].coords).sum::<Vector3>() / 3.0;
                    let reference = centroid - c.coords;
                    self.triangle(t, &reference, Patch::Wedge(w.pair));
                }
            }
        }
    }
}

/// Triangulates the boundary of a (possibly partial) Meissner solid.
pub fn tessellate(m: &MeissnerSolid, level: u32) -> TriangleMesh {
    let mut b = Builder {
        m,
        segments: 1usize << level,
        mesh: TriangleMesh::default(),
        curves: HashMap::new(),
    };
    b.mesh.vertices = m.base.centers.clone();
    for f in &m.faces {
        b.cap(f.center, &f.boundary);
    }
    for (wi, w) in m.wedges.iter().enumerate() {
        b.wedge(wi, w);
    }
    b.mesh
}

/// Triangulates a Reuleaux polyhedron (no edge rounded).
pub fn tessellate_polyhedron(phi: &ReuleauxPolyhedron, level: u32, tol: &Tolerance) -> Result<TriangleMesh> {
    let pairs = crate::surgery::dual_pairs(phi, tol)?;
    let m = perform_partial_surgery(phi, vec![None; pairs.len()], tol)?;
    Ok(tessellate(&m, level))
}

/// Largest distance of a mesh vertex from the exact patch its triangles come from.
pub fn inscribed_residual(mesh: &TriangleMesh, m: &MeissnerSolid) -> f64 {
    let mut worst: f64 = 0.0;
    for (t, patch) in mesh.triangles.iter().zip(&mesh.provenance) {
        for &i in t {
            let p = mesh.vertices[i];
            let r = match *patch {
                Patch::Cap(x) => ((p - m.vertex(x)).norm() - 1.0).abs(),
                Patch::Wedge(pair) => {
                    let w = m.wedges.iter().find(|w| w.pair == pair).expect("wedge of pair");
                    wedge_residual(m, w, &p)
                }
                Patch::Sphere => (p.coords.norm() - 1.0).abs(),
            };
            worst = worst.max(r);
        }
    }
    worst
}

/// Distance of `p` from the wedge surface, measured along its own arc plane.
fn wedge_residual(m: &MeissnerSolid, w: &Wedge, p: &Point3) -> f64 {
    let frame = ArcFrame::new(&w.dual_arc);
    let off = p - frame.center;
    let radial = off - frame.normal * off.dot(&frame.normal);
    if radial.norm() < 1e-9 {
        // on the axis: only the endpoints belong to the wedge
        return (p - m.vertex(w.x)).norm().min((p - m.vertex(w.y)).norm());
    }
    let dir = -radial.normalize();
    let c = if frame.spans(&dir) {
        frame.center + dir * frame.radius
    } else {
        // outside the span only by rounding for genuine wedge points
        let nearer = if frame.start.dot(&dir) >= frame.end.dot(&dir) {
            frame.start
        } else {
            frame.end
        };
        frame.center + nearer * frame.radius
    };
    ((p - c).norm() - 1.0).abs()
}

/// Octahedron refined `level` times, projected to the unit sphere.
pub fn unit_sphere_mesh(level: u32) -> TriangleMesh {
    let mut vertices = vec![
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(-1.0, 0.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, -1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(0.0, 0.0, -1.0),
    ];
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    for _ in 0..level {
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for t in &triangles {
            let mut m = [0; 3];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                m[k] = *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    vertices.push(Point3::from((vertices[a].coords + vertices[b].coords).normalize()));
                    vertices.len() - 1
                });
            }
            next.push([t[0], m[0], m[2]]);
            next.push([m[0], t[1], m[1]]);
            next.push([m[2], m[1], t[2]]);
            next.push([m[0], m[1], m[2]]);
        }
        triangles = next;
    }
    let provenance = vec![Patch::Sphere; triangles.len()];
    TriangleMesh {
        vertices,
        triangles,
        provenance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::volume_and_area;
    use crate::ballpoly::lift;
    use crate::fpvd::farthest_point_diagram;
    use crate::reuleaux::{make_random, make_regular, ReuleauxPolygon};
    use crate::surgery::{perform_surgery, SurgeryChoice};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn phi_of(poly: &ReuleauxPolygon) -> ReuleauxPolyhedron {
        let d = farthest_point_diagram(poly, &tol()).unwrap();
        ReuleauxPolyhedron::build(&lift(poly, &d).unwrap().points, &tol()).unwrap()
    }

    #[test]
    fn polyhedron_level_zero_is_a_sphere() {
        let phi = phi_of(&make_regular(3).unwrap());
        let mesh = tessellate_polyhedron(&phi, 0, &tol()).unwrap();
        mesh.check_watertight().unwrap();
        assert!(mesh.orientation_consistent());
        assert_eq!(mesh.euler_characteristic(), 2);
    }

    #[test]
    fn meissner_meshes_are_closed_at_all_levels() {
        let m = perform_surgery(&phi_of(&make_random(5, 2).unwrap()), &SurgeryChoice::Bottom, &tol()).unwrap();
        let mut last = 0;
        for level in 0..=4 {
            let mesh = tessellate(&m, level);
            mesh.check_watertight().unwrap();
            assert!(mesh.orientation_consistent(), "level {level}");
            assert_eq!(mesh.euler_characteristic(), 2);
            let res = inscribed_residual(&mesh, &m);
            assert!(res <= 1e-12, "level {level}: inscribed residual {res:e}");
            assert!(mesh.vertex_diameter() <= 1.0 + 1e-9);
            let (v, _) = volume_and_area(&mesh).unwrap();
            assert!(v > 0.0);
            if level >= 3 {
                let ratio = mesh.triangles.len() as f64 / last as f64;
                assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
            }
            last = mesh.triangles.len();
        }
    }

    #[test]
    fn sphere_volume_converges_from_below() {
        let mut prev = 0.0;
        for level in 0..=5 {
            let (v, a) = volume_and_area(&unit_sphere_mesh(level)).unwrap();
            assert!(v > prev && v < 4.0 * std::f64::consts::PI / 3.0);
            assert!(a < 4.0 * std::f64::consts::PI);
            prev = v;
        }
    }

    #[test]
    fn open_mesh_is_rejected() {
        let mut mesh = unit_sphere_mesh(1);
        mesh.triangles.pop();
        assert!(matches!(volume_and_area(&mesh), Err(Error::NotWatertight(_))));
    }

    #[test]
    fn closest_point_cases() {
        let (a, b, c) = (Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0));
        let q = closest_on_triangle(&Point3::new(0.2, 0.2, 1.0), &a, &b, &c);
        assert!((q - Point3::new(0.2, 0.2, 0.0)).norm() < 1e-15);
        assert_eq!(closest_on_triangle(&Point3::new(-1.0, -1.0, 0.0), &a, &b, &c), a);
        assert_eq!(closest_on_triangle(&Point3::new(0.5, -1.0, 0.0), &a, &b, &c), Point3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn pruned_diameter_matches_brute_force() {
        let mesh = unit_sphere_mesh(2);
        let mut brute: f64 = 0.0;
        for p in &mesh.vertices {
            for q in &mesh.vertices {
                brute = brute.max((p - q).norm());
            }
        }
        assert_eq!(max_distance(&mesh.vertices), brute);
    }
}
