//! Farthest-point Voronoi diagram of a Reuleaux polygon's vertices, its tree
//! and the dual farthest-point Delaunay family.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{circumcircle, Point2, Tolerance, Vector2};
use crate::report::Report;
use crate::reuleaux::ReuleauxPolygon;

/// Centers closer than this but farther than the merge threshold are treated
/// as an ambiguous cocircularity.
pub const AMBIGUITY_BAND: f64 = 1e-6;

/// Half-size of the box used to close the unbounded farthest-point cells.
pub const CELL_BOX: f64 = 4.0;

/// A member of the Delaunay family: its touch set `T` (0-based, counterclockwise)
/// and the disk through it that contains every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayFace {
    pub indices: Vec<usize>,
    pub center: Point2,
    pub radius: f64,
}

impl DelaunayFace {
    /// Consecutive index pairs around the face, unordered (smaller first).
    pub fn sides(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.indices.len();
        (0..m).map(move |i| {
            let a = self.indices[i];
            let b = self.indices[(i + 1) % m];
            (a.min(b), a.max(b))
        })
    }

    pub fn area(&self, poly: &ReuleauxPolygon) -> f64 {
        polygon_area(&self.indices.iter().map(|&i| poly.vertex(i)).collect::<Vec<_>>())
    }
}

/// Node of the Voronoi tree: an internal node `c_T` or a leaf `p_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeNode {
    Face(usize),
    Leaf(usize),
}

impl TreeNode {
    /// Signed encoding used in JSON: faces `+(f+1)`, leaves `-(i+1)`.
    pub fn code(self) -> i64 {
        match self {
            TreeNode::Face(f) => f as i64 + 1,
            TreeNode::Leaf(i) => -(i as i64 + 1),
        }
    }

    pub fn from_code(c: i64) -> Option<Self> {
        match c {
            0 => None,
            c if c > 0 => Some(TreeNode::Face(c as usize - 1)),
            c => Some(TreeNode::Leaf((-c) as usize - 1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "DiagramJson", try_from = "DiagramJson")]
pub struct FarthestPointDiagram {
    pub polygon: ReuleauxPolygon,
    pub faces: Vec<DelaunayFace>,
    pub tree_edges: Vec<(TreeNode, TreeNode)>,
    /// Farthest-point cell of each vertex, clipped to a bounding box.
    pub cells: Vec<Vec<Point2>>,
}

#[derive(Serialize, Deserialize)]
struct FaceJson {
    #[serde(rename = "T")]
    t: Vec<usize>,
    #[serde(rename = "c_T")]
    c: [f64; 2],
    #[serde(rename = "r_T")]
    r: f64,
}

#[derive(Serialize, Deserialize)]
struct DiagramJson {
    polygon: ReuleauxPolygon,
    faces: Vec<FaceJson>,
    tree: Vec<[i64; 2]>,
    cells: Vec<Vec<[f64; 2]>>,
}

impl From<FarthestPointDiagram> for DiagramJson {
    fn from(d: FarthestPointDiagram) -> Self {
        DiagramJson {
            faces: d
                .faces
                .iter()
                .map(|f| FaceJson {
                    t: f.indices.iter().map(|i| i + 1).collect(),
                    c: [f.center.x, f.center.y],
                    r: f.radius,
                })
                .collect(),
            tree: d.tree_edges.iter().map(|(a, b)| [a.code(), b.code()]).collect(),
            cells: d
                .cells
                .iter()
                .map(|c| c.iter().map(|p| [p.x, p.y]).collect())
                .collect(),
            polygon: d.polygon,
        }
    }
}

impl TryFrom<DiagramJson> for FarthestPointDiagram {
    type Error = String;

    fn try_from(j: DiagramJson) -> std::result::Result<Self, String> {
        let n = j.polygon.n();
        let faces = j
            .faces
            .into_iter()
            .map(|f| {
                if f.t.iter().any(|&i| i == 0 || i > n) {
                    return Err(format!("face index out of range 1..={n}"));
                }
                Ok(DelaunayFace {
                    indices: f.t.iter().map(|i| i - 1).collect(),
                    center: Point2::new(f.c[0], f.c[1]),
                    radius: f.r,
                })
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let tree_edges = j
            .tree
            .iter()
            .map(|[a, b]| {
                let a = TreeNode::from_code(*a).ok_or("tree node 0 is invalid")?;
                let b = TreeNode::from_code(*b).ok_or("tree node 0 is invalid")?;
                Ok((a, b))
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        Ok(FarthestPointDiagram {
            polygon: j.polygon,
            faces,
            tree_edges,
            cells: j
                .cells
                .iter()
                .map(|c| c.iter().map(|p| Point2::new(p[0], p[1])).collect())
                .collect(),
        })
    }
}

/// Farthest-point Delaunay family of the polygon's vertices.
///
/// Brute force over vertex triples; circumdisks containing every vertex are
/// kept and those with (nearly) equal center and radius are merged into one
/// face.
pub fn delaunay_family(poly: &ReuleauxPolygon, tol: &Tolerance) -> Result<Vec<DelaunayFace>> {
    let n = poly.n();
    let pts = poly.vertices();
    let mut candidates: Vec<(Point2, f64, [usize; 3])> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let Ok((c, r)) = circumcircle(&pts[i], &pts[j], &pts[k], tol) else {
                    continue;
                };
                if pts.iter().all(|p| (p - c).norm() <= r + tol.eq) {
                    candidates.push((c, r, [i, j, k]));
                }
            }
        }
    }

    let merge = tol.merge();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (ci, cand) in candidates.iter().enumerate() {
        let mut home = None;
        for (g, members) in groups.iter().enumerate() {
            let rep = &candidates[members[0]];
            let gap = (rep.0 - cand.0).norm().max((rep.1 - cand.1).abs());
            if gap <= merge {
                home = Some(g);
                break;
            }
            if gap <= AMBIGUITY_BAND {
                return Err(Error::DegenerateInput(format!(
                    "disks through {:?} and {:?} differ by {gap:e}",
                    rep.2, cand.2
                )));
            }
        }
        match home {
            Some(g) => groups[g].push(ci),
            None => groups.push(vec![ci]),
        }
    }

    let mut faces: Vec<DelaunayFace> = groups
        .iter()
        .map(|members| {
            let mut idx: Vec<usize> = members.iter().flat_map(|&m| candidates[m].2).collect();
            idx.sort_unstable();
            idx.dedup();
            let center = Point2::from(
                members.iter().map(|&m| candidates[m].0.coords).sum::<Vector2>()
                    / members.len() as f64,
            );
            let radius =
                idx.iter().map(|&i| (pts[i] - center).norm()).sum::<f64>() / idx.len() as f64;
            DelaunayFace {
                indices: idx,
                center,
                radius,
            }
        })
        .collect();

    for f in &faces {
        for (i, p) in pts.iter().enumerate() {
            let gap = ((p - f.center).norm() - f.radius).abs();
            if !f.indices.contains(&i) && gap <= AMBIGUITY_BAND {
                return Err(Error::DegenerateInput(format!(
                    "vertex {i} is {gap:e} from the circle of face {:?}",
                    f.indices
                )));
            }
        }
    }
    // vertex indices ascend counterclockwise, so sorted touch sets are already cyclic
    faces.sort_by(|a, b| a.indices.cmp(&b.indices));
    Ok(faces)
}

/// The Voronoi tree over `{c_T} ∪ {p_i}` and the farthest-point cells.
pub fn voronoi_tree(poly: &ReuleauxPolygon, faces: Vec<DelaunayFace>) -> Result<FarthestPointDiagram> {
    let n = poly.n();
    let mut side_owner: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, face) in faces.iter().enumerate() {
        for s in face.sides() {
            side_owner.entry(s).or_default().push(f);
        }
    }
    let mut edges = Vec::new();
    for (side, owners) in &side_owner {
        match owners.as_slice() {
            [_] => {}
            [a, b] => edges.push((TreeNode::Face(*a), TreeNode::Face(*b))),
            _ => {
                return Err(Error::NotATree(format!(
                    "side {side:?} is shared by faces {owners:?}"
                )))
            }
        }
    }
    for i in 0..n {
        let (a, b) = poly.diameters_of(i);
        let side = (a.min(b), a.max(b));
        match side_owner.get(&side).map(Vec::as_slice) {
            Some([f]) => edges.push((TreeNode::Leaf(i), TreeNode::Face(*f))),
            other => {
                return Err(Error::NotATree(format!(
                    "hull side {side:?} opposite vertex {i} has owners {other:?}"
                )))
            }
        }
    }
    let diagram = FarthestPointDiagram {
        cells: (0..n).map(|i| farthest_cell(poly, i)).collect(),
        polygon: poly.clone(),
        faces,
        tree_edges: edges,
    };
    if let Some(problem) = diagram.tree_defect() {
        return Err(Error::NotATree(problem));
    }
    Ok(diagram)
}

/// Convenience: family plus tree.
pub fn farthest_point_diagram(poly: &ReuleauxPolygon, tol: &Tolerance) -> Result<FarthestPointDiagram> {
    voronoi_tree(poly, delaunay_family(poly, tol)?)
}

/// Cell `{x : |x - p_i| ≥ |x - p_j| for all j}` intersected with a box.
fn farthest_cell(poly: &ReuleauxPolygon, i: usize) -> Vec<Point2> {
    let c = poly.centroid();
    let mut cell = vec![
        c + Vector2::new(-CELL_BOX, -CELL_BOX),
        c + Vector2::new(CELL_BOX, -CELL_BOX),
        c + Vector2::new(CELL_BOX, CELL_BOX),
        c + Vector2::new(-CELL_BOX, CELL_BOX),
    ];
    let pi = poly.vertex(i);
    for (j, pj) in poly.vertices().iter().enumerate() {
        if j == i {
            continue;
        }
        // keep 2 x·(p_j - p_i) ≥ |p_j|² - |p_i|²
        let normal = 2.0 * (pj - pi);
        let offset = pj.coords.norm_squared() - pi.coords.norm_squared();
        cell = clip_half_plane(&cell, &normal, offset);
    }
    cell
}

fn clip_half_plane(poly: &[Point2], normal: &Vector2, offset: f64) -> Vec<Point2> {
    let f = |p: &Point2| p.coords.dot(normal) - offset;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let (fa, fb) = (f(&a), f(&b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

pub fn polygon_area(pts: &[Point2]) -> f64 {
    let m = pts.len();
    (0..m)
        .map(|k| pts[k].coords.perp(&pts[(k + 1) % m].coords))
        .sum::<f64>()
        / 2.0
}

fn point_in_convex(poly: &[Point2], p: &Point2, slack: f64) -> bool {
    let m = poly.len();
    m >= 3
        && (0..m).all(|k| {
            let a = poly[k];
            let e = poly[(k + 1) % m] - a;
            e.perp(&(p - a)) >= -slack * e.norm()
        })
}

impl FarthestPointDiagram {
    pub fn node_count(&self) -> usize {
        self.faces.len() + self.polygon.n()
    }

    fn node_index(&self, v: TreeNode) -> usize {
        match v {
            TreeNode::Face(f) => f,
            TreeNode::Leaf(i) => self.faces.len() + i,
        }
    }

    /// `None` when the edge list is a spanning tree over all nodes.
    pub fn tree_defect(&self) -> Option<String> {
        let m = self.node_count();
        if self.tree_edges.len() + 1 != m {
            return Some(format!("{} edges on {m} nodes", self.tree_edges.len()));
        }
        let mut adj = vec![Vec::new(); m];
        for &(a, b) in &self.tree_edges {
            let (a, b) = (self.node_index(a), self.node_index(b));
            if a >= m || b >= m {
                return Some("edge references a missing node".into());
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        let missed = seen.iter().filter(|s| !**s).count();
        (missed > 0).then(|| format!("{missed} nodes unreachable"))
    }

    pub fn position(&self, v: TreeNode) -> Point2 {
        match v {
            TreeNode::Face(f) => self.faces[f].center,
            TreeNode::Leaf(i) => self.polygon.vertex(i),
        }
    }

    /// Checks the family, the tiling, the tree and the cells.
    pub fn validate(&self, tol: &Tolerance) -> Report {
        let mut report = Report::new();
        let pts = self.polygon.vertices();

        let mut contain: f64 = 0.0;
        let mut touch_ok = true;
        let mut radius_max: f64 = 0.0;
        for f in &self.faces {
            radius_max = radius_max.max(f.radius);
            for (i, p) in pts.iter().enumerate() {
                let d = (p - f.center).norm() - f.radius;
                contain = contain.max(d);
                let on = d.abs() <= tol.eq;
                touch_ok &= on == f.indices.contains(&i) && f.indices.len() >= 3;
            }
        }
        report.push("disks_contain_vertices", contain <= tol.eq, contain.max(0.0));
        report.push("touch_sets_exact", touch_ok, 0.0);
        report.push("radii_below_one", radius_max < 1.0, radius_max);

        let tiled: f64 = self.faces.iter().map(|f| f.area(&self.polygon)).sum();
        let hull = polygon_area(pts);
        report.push("faces_tile_hull", (tiled - hull).abs() <= tol.eq, (tiled - hull).abs());

        let defect = self.tree_defect();
        report.push_detail(
            "tree",
            defect.is_none(),
            0.0,
            defect.unwrap_or_else(|| format!("{} nodes", self.node_count())),
        );

        // every point on the arc centered at p_i has p_i as a farthest vertex
        let mut cell_res: f64 = 0.0;
        let mut in_cell = true;
        let n = self.polygon.n();
        for i in 0..n {
            let arc = (i + self.polygon.half_turn() - 1) % n;
            for s in 0..64 {
                let x = self.polygon.arc_point(arc, (s as f64 + 0.5) / 64.0);
                let di = (x - pts[i]).norm();
                let worst = pts.iter().map(|p| (x - p).norm()).fold(0.0, f64::max);
                cell_res = cell_res.max(worst - di);
                in_cell &= point_in_convex(&self.cells[i], &x, tol.eq);
            }
        }
        report.push("cells_contain_arcs", cell_res <= tol.eq && in_cell, cell_res);
        report
    }

    /// Graphviz rendering of the tree with leaves at their planar positions.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph voronoi_tree {\n");
        for (f, face) in self.faces.iter().enumerate() {
            let label: Vec<String> = face.indices.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(
                s,
                "  c{f} [label=\"T{{{}}}\", pos=\"{},{}\"];",
                label.join(","),
                face.center.x,
                face.center.y
            );
        }
        for (i, p) in self.polygon.vertices().iter().enumerate() {
            let _ = writeln!(s, "  p{i} [label=\"p{}\", shape=box, pos=\"{},{}\"];", i + 1, p.x, p.y);
        }
        let name = |v: TreeNode| match v {
            TreeNode::Face(f) => format!("c{f}"),
            TreeNode::Leaf(i) => format!("p{i}"),
        };
        for &(a, b) in &self.tree_edges {
            let _ = writeln!(s, "  {} -- {};", name(a), name(b));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reuleaux::{make_random, make_regular};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn triangle_has_one_face() {
        let p = make_regular(3).unwrap();
        let f = delaunay_family(&p, &tol()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].indices, vec![0, 1, 2]);
        assert_abs_diff_eq!(f[0].radius, 0.5773503, epsilon = 1e-7);
        assert_abs_diff_eq!(f[0].center.coords.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn regular_pentagon_merges_into_one_face() {
        let p = make_regular(5).unwrap();
        let f = delaunay_family(&p, &tol()).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].indices, vec![0, 1, 2, 3, 4]);
        assert_abs_diff_eq!(f[0].radius, 0.5257311, epsilon = 1e-7);
        let d = voronoi_tree(&p, f).unwrap();
        assert_eq!(d.tree_edges.len(), 5);
        assert!(d.tree_edges.iter().all(|e| e.1 == TreeNode::Face(0)));
    }

    #[test]
    fn triangle_star_tree() {
        let d = farthest_point_diagram(&make_regular(3).unwrap(), &tol()).unwrap();
        assert_eq!(d.node_count(), 4);
        assert_eq!(d.tree_edges.len(), 3);
        assert!(d.validate(&tol()).pass());
    }

    #[test]
    fn generic_pentagon_triangulates() {
        let p = make_random(5, 42).unwrap();
        let d = farthest_point_diagram(&p, &tol()).unwrap();
        assert_eq!(d.faces.len(), 3);
        assert!(d.faces.iter().all(|f| f.indices.len() == 3));
        assert_eq!(d.node_count(), 8);
        assert_eq!(d.tree_edges.len(), 7);
        let r = d.validate(&tol());
        assert!(r.pass(), "{r}");
    }

    #[test]
    fn random_polygons_give_valid_diagrams() {
        for n in [3, 5, 7, 9, 11, 21] {
            for seed in 0..20 {
                let p = make_random(n, seed).unwrap();
                let d = farthest_point_diagram(&p, &tol()).unwrap();
                assert_eq!(d.faces.len(), n - 2, "n={n} seed={seed}");
                let r = d.validate(&tol());
                assert!(r.pass(), "n={n} seed={seed}\n{r}");
            }
        }
    }

    #[test]
    fn broken_tree_is_reported() {
        let mut d = farthest_point_diagram(&make_random(7, 1).unwrap(), &tol()).unwrap();
        d.tree_edges.pop();
        assert!(d.tree_defect().is_some());
        assert!(!d.validate(&tol()).pass());
    }

    #[test]
    fn node_codes_round_trip() {
        for v in [TreeNode::Face(0), TreeNode::Face(7), TreeNode::Leaf(0), TreeNode::Leaf(4)] {
            assert_eq!(TreeNode::from_code(v.code()), Some(v));
        }
        assert_eq!(TreeNode::Leaf(0).code(), -1);
        assert_eq!(TreeNode::from_code(0), None);
    }

    #[test]
    fn json_round_trip() {
        let d = farthest_point_diagram(&make_random(7, 2).unwrap(), &tol()).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["faces"][0]["T"].as_array().unwrap().iter().all(|i| i.as_u64().unwrap() >= 1));
        let back: FarthestPointDiagram = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn dot_lists_every_edge() {
        let d = farthest_point_diagram(&make_random(5, 3).unwrap(), &tol()).unwrap();
        let dot = d.to_dot();
        assert_eq!(dot.matches(" -- ").count(), 7);
    }
}
