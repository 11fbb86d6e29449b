//! Surgery on a Reuleaux polyhedron: for each pair of dual edges one edge is
//! rounded off by the wedge swept by unit arcs centered on the other.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::ballpoly::ReuleauxPolyhedron;
use crate::error::{Error, Result};
use crate::geom::{slerp, Arc3, Point3, Tolerance, Vector3};
use crate::report::Report;

/// Edges `edge_a < edge_b` whose endpoints are each other's dual centers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualPair {
    pub edge_a: usize,
    pub edge_b: usize,
}

impl DualPair {
    pub fn edge(&self, pick_b: bool) -> usize {
        if pick_b {
            self.edge_b
        } else {
            self.edge_a
        }
    }
}

pub fn dual_pairs(phi: &ReuleauxPolyhedron, tol: &Tolerance) -> Result<Vec<DualPair>> {
    let mut pairs = Vec::new();
    for (i, e) in phi.edges.iter().enumerate() {
        let mut ends = e.ends;
        ends.sort_unstable();
        let Some(j) = phi.edges.iter().position(|f| f.centers == ends) else {
            return Err(Error::NotInvolutive {
                witness: e.ends.to_vec(),
                detail: format!("edge {i} has no dual edge"),
            });
        };
        if j == i {
            return Err(Error::SelfDualEdge(i));
        }
        let mut back = phi.edges[j].ends;
        back.sort_unstable();
        if back != e.centers {
            return Err(Error::NotInvolutive {
                witness: vec![i, j],
                detail: "edge duality is not symmetric".into(),
            });
        }
        for &x in &e.ends {
            for &a in &e.centers {
                let d = (phi.centers[x] - phi.centers[a]).norm();
                if !tol.is_unit(d) {
                    return Err(Error::MetricEmbeddingViolation {
                        witness: vec![x, a],
                        detail: format!("dual pair ({i}, {j}) has cross distance {d}"),
                    });
                }
            }
        }
        if i < j {
            pairs.push(DualPair { edge_a: i, edge_b: j });
        }
    }
    Ok(pairs)
}

/// Which edge of each dual pair gets rounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurgeryChoice {
    /// The edge whose arc midpoint is lower.
    Bottom,
    /// The edge whose arc midpoint is higher.
    Top,
    /// One bit per pair: `false` picks `edge_a`, `true` picks `edge_b`.
    Mask(Vec<bool>),
    /// Explicit edge indices, exactly one per pair.
    Edges(BTreeSet<usize>),
}

/// Reference to a curve bounding a trimmed face or a wedge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    /// An edge arc of the base polyhedron.
    Edge { edge: usize },
    /// The geodesic of wedge `wedge` on the unit sphere about vertex `at`.
    Geodesic { wedge: usize, at: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSide {
    pub curve: Curve,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimmedFace {
    pub center: usize,
    pub boundary: Vec<CurveSide>,
}

/// Surface of revolution replacing the region around a rounded edge `xy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wedge {
    pub pair: usize,
    pub surgered: usize,
    pub retained: usize,
    pub x: usize,
    pub y: usize,
    /// Endpoints of the retained arc; the dual arc runs from `a` to `b`.
    pub a: usize,
    pub b: usize,
    pub dual_arc: Arc3,
    /// Geodesic from `x` to `y` on `S(a, 1)`.
    pub sigma_a: Arc3,
    /// Geodesic from `x` to `y` on `S(b, 1)`.
    pub sigma_b: Arc3,
    pub boundary: Vec<CurveSide>,
}

impl Wedge {
    /// Point at fraction `t` of the unit arc from `x` to `y` centered at `dual_arc(s)`.
    pub fn point(&self, xp: &Point3, yp: &Point3, s: f64, t: f64) -> Point3 {
        if t <= 0.0 {
            return *xp;
        }
        if t >= 1.0 {
            return *yp;
        }
        let c = self.dual_arc.point_at(s);
        c + slerp(&(xp - c), &(yp - c), t)
    }

    pub fn sigma(&self, at: usize) -> &Arc3 {
        if at == self.a {
            &self.sigma_a
        } else {
            &self.sigma_b
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeissnerSolid {
    pub base: ReuleauxPolyhedron,
    pub pairs: Vec<DualPair>,
    /// Per pair: `Some(false)` rounds `edge_a`, `Some(true)` rounds `edge_b`,
    /// `None` leaves the pair untouched.
    pub mask: Vec<Option<bool>>,
    pub wedges: Vec<Wedge>,
    pub faces: Vec<TrimmedFace>,
}

fn geodesic(center: &Point3, from: &Point3, to: &Point3) -> Arc3 {
    let normal = (from - center).cross(&(to - center));
    Arc3::through(*center, normal, from, to)
}

fn resolve(phi: &ReuleauxPolyhedron, pairs: &[DualPair], choice: &SurgeryChoice, tol: &Tolerance) -> Result<Vec<bool>> {
    match choice {
        SurgeryChoice::Mask(bits) => {
            if bits.len() != pairs.len() {
                return Err(Error::BadMask(format!(
                    "mask has {} bits for {} dual pairs",
                    bits.len(),
                    pairs.len()
                )));
            }
            Ok(bits.clone())
        }
        SurgeryChoice::Edges(set) => {
            if let Some(&e) = set.iter().find(|&&e| e >= phi.edges.len()) {
                return Err(Error::BadMask(format!("edge {e} does not exist")));
            }
            pairs
                .iter()
                .enumerate()
                .map(|(p, pair)| match (set.contains(&pair.edge_a), set.contains(&pair.edge_b)) {
                    (true, false) => Ok(false),
                    (false, true) => Ok(true),
                    (true, true) => Err(Error::BadMask(format!("both edges of pair {p} selected"))),
                    (false, false) => Err(Error::BadMask(format!("no edge of pair {p} selected"))),
                })
                .collect()
        }
        SurgeryChoice::Bottom | SurgeryChoice::Top => pairs
            .iter()
            .enumerate()
            .map(|(p, pair)| {
                let za = phi.edges[pair.edge_a].arc.midpoint().z;
                let zb = phi.edges[pair.edge_b].arc.midpoint().z;
                if (za - zb).abs() <= tol.eq {
                    return Err(Error::AmbiguousBottom { pair: p });
                }
                let b_lower = zb < za;
                Ok(if *choice == SurgeryChoice::Bottom {
                    b_lower
                } else {
                    !b_lower
                })
            })
            .collect(),
    }
}

/// Rounds one edge of every dual pair.
pub fn perform_surgery(phi: &ReuleauxPolyhedron, choice: &SurgeryChoice, tol: &Tolerance) -> Result<MeissnerSolid> {
    let pairs = dual_pairs(phi, tol)?;
    let bits = resolve(phi, &pairs, choice, tol)?;
    assemble(phi, pairs, bits.into_iter().map(Some).collect())
}

/// Like [`perform_surgery`] but pairs marked `None` keep both sharp edges.
/// The result is generally not of constant width.
pub fn perform_partial_surgery(phi: &ReuleauxPolyhedron, mask: Vec<Option<bool>>, tol: &Tolerance) -> Result<MeissnerSolid> {
    let pairs = dual_pairs(phi, tol)?;
    if mask.len() != pairs.len() {
        return Err(Error::BadMask(format!(
            "mask has {} entries for {} dual pairs",
            mask.len(),
            pairs.len()
        )));
    }
    assemble(phi, pairs, mask)
}

fn assemble(phi: &ReuleauxPolyhedron, pairs: Vec<DualPair>, mask: Vec<Option<bool>>) -> Result<MeissnerSolid> {
    let x = &phi.centers;
    let mut wedges = Vec::new();
    let mut wedge_of_edge = vec![None; phi.edges.len()];
    for (p, (pair, pick)) in pairs.iter().zip(&mask).enumerate() {
        let Some(pick) = *pick else { continue };
        let surgered = pair.edge(pick);
        let retained = pair.edge(!pick);
        let e = &phi.edges[surgered];
        let r = &phi.edges[retained];
        let [xi, yi] = e.ends;
        let [ai, bi] = r.ends;
        let sigma_a = geodesic(&x[ai], &x[xi], &x[yi]);
        let sigma_b = geodesic(&x[bi], &x[xi], &x[yi]);
        let mut w = Wedge {
            pair: p,
            surgered,
            retained,
            x: xi,
            y: yi,
            a: ai,
            b: bi,
            dual_arc: r.arc,
            sigma_a,
            sigma_b,
            boundary: Vec::new(),
        };
        let id = wedges.len();
        // orient the wedge boundary counterclockwise from outside
        let (h, s, t) = (1e-4, 0.5, 0.5);
        let ps = w.point(&x[xi], &x[yi], s + h, t) - w.point(&x[xi], &x[yi], s - h, t);
        let pt = w.point(&x[xi], &x[yi], s, t + h) - w.point(&x[xi], &x[yi], s, t - h);
        let out = w.point(&x[xi], &x[yi], s, t) - w.dual_arc.point_at(s);
        let side = |at: usize, forward: bool| CurveSide {
            curve: Curve::Geodesic { wedge: id, at },
            forward,
        };
        w.boundary = if ps.cross(&pt).dot(&out) > 0.0 {
            vec![side(bi, true), side(ai, false)]
        } else {
            vec![side(ai, true), side(bi, false)]
        };
        wedge_of_edge[surgered] = Some(id);
        wedges.push(w);
    }

    let faces = phi
        .faces
        .iter()
        .map(|f| TrimmedFace {
            center: f.center,
            boundary: f
                .boundary
                .iter()
                .map(|s| CurveSide {
                    curve: match wedge_of_edge[s.edge] {
                        Some(w) => Curve::Geodesic { wedge: w, at: f.center },
                        None => Curve::Edge { edge: s.edge },
                    },
                    forward: s.forward,
                })
                .collect(),
        })
        .collect();

    Ok(MeissnerSolid {
        base: phi.clone(),
        pairs,
        mask,
        wedges,
        faces,
    })
}

impl MeissnerSolid {
    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(Option::is_some)
    }

    pub fn surgered_edges(&self) -> BTreeSet<usize> {
        self.wedges.iter().map(|w| w.surgered).collect()
    }

    pub fn vertex(&self, v: usize) -> Point3 {
        self.base.centers[v]
    }

    pub fn curve_arc(&self, c: &Curve) -> Arc3 {
        match *c {
            Curve::Edge { edge } => self.base.edges[edge].arc,
            Curve::Geodesic { wedge, at } => *self.wedges[wedge].sigma(at),
        }
    }

    pub fn wedge_point(&self, w: &Wedge, s: f64, t: f64) -> Point3 {
        w.point(&self.vertex(w.x), &self.vertex(w.y), s, t)
    }

    /// Ball centers of the body: the vertices and the retained arcs.
    pub fn skeleton(&self) -> (Vec<Point3>, Vec<Arc3>) {
        (self.base.centers.clone(), self.wedges.iter().map(|w| w.dual_arc).collect())
    }

    /// Edge arcs that stay sharp: retained arcs plus both edges of untouched pairs.
    pub fn sharp_arcs(&self) -> Vec<Arc3> {
        let rounded = self.surgered_edges();
        (0..self.base.edges.len())
            .filter(|e| !rounded.contains(e))
            .map(|e| self.base.edges[e].arc)
            .collect()
    }

    /// Largest `|p - c| - 1` over the skeleton.
    pub fn excess(&self, p: &Point3) -> f64 {
        let mut worst = self.base.excess(p);
        for w in &self.wedges {
            let f = crate::geom::ArcFrame::new(&w.dual_arc);
            worst = worst.max(f.max_distance_sq(p).max(0.0).sqrt() - 1.0);
        }
        worst
    }

    /// Structural checks and sampled geometric invariants of the surgery.
    pub fn validate(&self, tol: &Tolerance) -> Report {
        let mut r = Report::new();
        let complete = self.is_complete();
        r.push_detail(
            "one_edge_per_pair",
            complete && self.wedges.len() == self.pairs.len(),
            0.0,
            format!("{} wedges for {} pairs", self.wedges.len(), self.pairs.len()),
        );
        let nv = self.base.n_vertices();
        r.push("wedge_count", self.wedges.len() + 1 == nv && self.pairs.len() * 2 == self.base.edges.len(), 0.0);

        let mut dual_res: f64 = 0.0;
        let mut contain: f64 = 0.0;
        for w in &self.wedges {
            let (xp, yp) = (self.vertex(w.x), self.vertex(w.y));
            let mid = Point3::from((xp.coords + yp.coords) / 2.0);
            dual_res = dual_res
                .max((w.dual_arc.center - mid).norm())
                .max(w.dual_arc.normal.cross(&(yp - xp).normalize()).norm());
            for i in 0..=16 {
                let c = w.dual_arc.point_at(i as f64 / 16.0);
                dual_res = dual_res
                    .max(((c - xp).norm() - 1.0).abs())
                    .max(((c - yp).norm() - 1.0).abs());
            }
            for i in 0..64 {
                for j in 0..64 {
                    let p = self.wedge_point(w, i as f64 / 63.0, j as f64 / 63.0);
                    contain = contain.max(self.base.excess(&p));
                }
            }
        }
        r.push("dual_arc_geometry", dual_res <= tol.eq, dual_res);
        r.push("wedge_in_base", contain <= 1e-12, contain.max(0.0));

        let mut trim: f64 = 0.0;
        for w in &self.wedges {
            let (xp, yp) = (self.vertex(w.x), self.vertex(w.y));
            for (at, sigma) in [(w.a, &w.sigma_a), (w.b, &w.sigma_b)] {
                trim = trim
                    .max((sigma.start_point() - xp).norm())
                    .max((sigma.end_point() - yp).norm());
                let c = self.vertex(at);
                for k in 0..=16 {
                    let p = sigma.point_at(k as f64 / 16.0);
                    trim = trim.max(((p - c).norm() - 1.0).abs()).max(self.base.excess(&p));
                }
            }
            // the geodesics are the extreme members of the arc family
            trim = trim
                .max((self.wedge_point(w, 0.0, 0.5) - w.sigma_a.midpoint()).norm())
                .max((self.wedge_point(w, 1.0, 0.5) - w.sigma_b.midpoint()).norm());
        }
        r.push("geodesic_trims", trim <= tol.eq, trim);

        // every curve is used twice, in opposite directions
        let mut uses: std::collections::BTreeMap<String, Vec<bool>> = Default::default();
        let key = |c: &Curve| format!("{c:?}");
        for f in &self.faces {
            for s in &f.boundary {
                uses.entry(key(&s.curve)).or_default().push(s.forward);
            }
        }
        for w in &self.wedges {
            for s in &w.boundary {
                uses.entry(key(&s.curve)).or_default().push(s.forward);
            }
        }
        let closed = uses.values().all(|u| u.len() == 2 && u[0] != u[1]);
        r.push("surface_closure", closed, 0.0);

        let mut wedge_orient = true;
        for w in &self.wedges {
            // the loop Σ forward then the other Σ backward encloses the wedge
            let mut pts = Vec::new();
            for s in &w.boundary {
                let arc = self.curve_arc(&s.curve);
                for k in 0..8 {
                    let t = k as f64 / 8.0;
                    pts.push(arc.point_at(if s.forward { t } else { 1.0 - t }));
                }
            }
            let out = self.wedge_point(w, 0.5, 0.5) - w.dual_arc.point_at(0.5);
            wedge_orient &= crate::ballpoly::newell(&pts).dot(&out) > 0.0;
        }
        r.push("wedge_orientation", wedge_orient, 0.0);
        r
    }

    /// Outward unit normal of wedge `w` at `(s, t)`.
    pub fn wedge_normal(&self, w: &Wedge, s: f64, t: f64) -> Vector3 {
        (self.wedge_point(w, s, t) - w.dual_arc.point_at(s)).normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballpoly::lift;
    use crate::fpvd::farthest_point_diagram;
    use crate::reuleaux::{make_random, make_regular, ReuleauxPolygon};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn phi_of(poly: &ReuleauxPolygon) -> ReuleauxPolyhedron {
        let d = farthest_point_diagram(poly, &tol()).unwrap();
        ReuleauxPolyhedron::build(&lift(poly, &d).unwrap().points, &tol()).unwrap()
    }

    #[test]
    fn pair_counts() {
        assert_eq!(dual_pairs(&phi_of(&make_regular(3).unwrap()), &tol()).unwrap().len(), 3);
        assert_eq!(dual_pairs(&phi_of(&make_regular(5).unwrap()), &tol()).unwrap().len(), 5);
        assert_eq!(dual_pairs(&phi_of(&make_random(5, 42).unwrap()), &tol()).unwrap().len(), 7);
    }

    #[test]
    fn tetrahedron_pairs_are_opposite_edges() {
        let phi = phi_of(&make_regular(3).unwrap());
        for p in dual_pairs(&phi, &tol()).unwrap() {
            let a: BTreeSet<usize> = phi.edges[p.edge_a].ends.into_iter().collect();
            let b: BTreeSet<usize> = phi.edges[p.edge_b].ends.into_iter().collect();
            assert!(a.is_disjoint(&b));
        }
    }

    #[test]
    fn bottom_rounds_the_base_triangle() {
        let phi = phi_of(&make_regular(3).unwrap());
        let m = perform_surgery(&phi, &SurgeryChoice::Bottom, &tol()).unwrap();
        assert_eq!(m.wedges.len(), 3);
        for w in &m.wedges {
            assert!(w.x < 3 && w.y < 3, "rounded edge {}-{} is not a base edge", w.x, w.y);
        }
        let r = m.validate(&tol());
        assert!(r.pass(), "{r}");
        let base: BTreeSet<usize> = m.surgered_edges();
        let via_edges = perform_surgery(&phi, &SurgeryChoice::Edges(base), &tol()).unwrap();
        assert_eq!(via_edges, m);
    }

    #[test]
    fn top_is_complementary() {
        let phi = phi_of(&make_random(7, 0).unwrap());
        let bottom = perform_surgery(&phi, &SurgeryChoice::Bottom, &tol()).unwrap();
        let top = perform_surgery(&phi, &SurgeryChoice::Top, &tol()).unwrap();
        for (a, b) in bottom.mask.iter().zip(&top.mask) {
            assert_eq!(a.map(|v| !v), *b);
        }
        assert!(top.validate(&tol()).pass());
    }

    #[test]
    fn bad_masks() {
        let phi = phi_of(&make_regular(3).unwrap());
        assert!(matches!(
            perform_surgery(&phi, &SurgeryChoice::Mask(vec![true; 4]), &tol()),
            Err(Error::BadMask(_))
        ));
        let pairs = dual_pairs(&phi, &tol()).unwrap();
        let both: BTreeSet<usize> = [pairs[0].edge_a, pairs[0].edge_b, pairs[1].edge_a, pairs[2].edge_a].into();
        assert!(matches!(
            perform_surgery(&phi, &SurgeryChoice::Edges(both), &tol()),
            Err(Error::BadMask(_))
        ));
    }

    #[test]
    fn skeleton_sizes() {
        for (poly, pts) in [
            (make_regular(3).unwrap(), 4),
            (make_regular(5).unwrap(), 6),
            (make_random(5, 42).unwrap(), 8),
        ] {
            let m = perform_surgery(&phi_of(&poly), &SurgeryChoice::Bottom, &tol()).unwrap();
            let (p, a) = m.skeleton();
            assert_eq!((p.len(), a.len()), (pts, pts - 1));
        }
    }

    #[test]
    fn masks_validate() {
        let phi = phi_of(&make_random(9, 3).unwrap());
        let k = dual_pairs(&phi, &tol()).unwrap().len();
        for bits in 0..8u32 {
            let mask: Vec<bool> = (0..k).map(|i| (bits >> (i % 3)) & 1 == 1).collect();
            let m = perform_surgery(&phi, &SurgeryChoice::Mask(mask), &tol()).unwrap();
            let r = m.validate(&tol());
            assert!(r.pass(), "{r}");
        }
    }

    #[test]
    fn partial_surgery_is_flagged() {
        let phi = phi_of(&make_regular(3).unwrap());
        let m = perform_partial_surgery(&phi, vec![Some(false), Some(false), None], &tol()).unwrap();
        assert_eq!(m.wedges.len(), 2);
        assert_eq!(m.sharp_arcs().len(), 4);
        assert!(!m.validate(&tol()).get("one_edge_per_pair").unwrap().pass);
    }

    #[test]
    fn json_round_trip() {
        let m = perform_surgery(&phi_of(&make_random(5, 9).unwrap()), &SurgeryChoice::Bottom, &tol()).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: MeissnerSolid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
