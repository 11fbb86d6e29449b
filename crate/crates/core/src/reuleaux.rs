//! Reuleaux polygons of width 1 in the plane `z = 0`.
//!
//! Vertices are stored counterclockwise. With `k = (n + 1) / 2`, the boundary
//! arc leaving `p_i` ends at `p_{i+1}` and is centered at `p_{i+k}`; the two
//! diameters at `p_i` reach `p_{i+k-1}` and `p_{i+k}`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point2, Tolerance, Vector2};
use crate::report::Report;

/// Smallest accepted arc angle for generated polygons (radians).
pub const MIN_ARC_ANGLE: f64 = 0.05;
/// Generation attempts before giving up.
pub const MAX_ATTEMPTS: usize = 100;
/// Number of planar directions sampled by the width check.
pub const WIDTH_DIRECTIONS: usize = 360;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolygonJson", try_from = "PolygonJson")]
pub struct ReuleauxPolygon {
    vertices: Vec<Point2>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolygonJson {
    n: usize,
    vertices: Vec<[f64; 2]>,
}

impl From<ReuleauxPolygon> for PolygonJson {
    fn from(p: ReuleauxPolygon) -> Self {
        PolygonJson {
            n: p.n(),
            vertices: p.vertices.iter().map(|v| [v.x, v.y]).collect(),
        }
    }
}

impl TryFrom<PolygonJson> for ReuleauxPolygon {
    type Error = String;

    fn try_from(j: PolygonJson) -> std::result::Result<Self, String> {
        if j.n != j.vertices.len() {
            return Err(format!("n = {} but {} vertices given", j.n, j.vertices.len()));
        }
        if j.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err("non-finite coordinate".into());
        }
        Ok(ReuleauxPolygon::from_vertices(
            j.vertices.iter().map(|v| Point2::new(v[0], v[1])).collect(),
        ))
    }
}

impl ReuleauxPolygon {
    /// Wraps a vertex list without checking it; see [`ReuleauxPolygon::validate`].
    pub fn from_vertices(vertices: Vec<Point2>) -> Self {
        Self { vertices }
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i % self.n()]
    }

    pub fn half_turn(&self) -> usize {
        self.n().div_ceil(2)
    }

    /// Index of the center of the arc leaving vertex `i`.
    pub fn arc_center(&self, i: usize) -> usize {
        (i + self.half_turn()) % self.n()
    }

    /// The two vertices at unit distance from `p_i`; they are consecutive.
    pub fn diameters_of(&self, i: usize) -> (usize, usize) {
        let n = self.n();
        let k = self.half_turn();
        ((i + k - 1) % n, (i + k) % n)
    }

    /// Central angle of the arc leaving vertex `i`.
    pub fn arc_angle(&self, i: usize) -> f64 {
        let chord = (self.vertex(i + 1) - self.vertex(i)).norm();
        2.0 * (chord / 2.0).min(1.0).asin()
    }

    /// Point at fraction `t` along the arc leaving `p_i`.
    pub fn arc_point(&self, i: usize, t: f64) -> Point2 {
        let c = self.vertex(self.arc_center(i));
        let a = self.vertex(i) - c;
        let b = self.vertex(i + 1) - c;
        let a0 = a.y.atan2(a.x);
        let mut sweep = b.y.atan2(b.x) - a0;
        if sweep < 0.0 {
            sweep += 2.0 * PI;
        }
        let th = a0 + t * sweep;
        c + Vector2::new(th.cos(), th.sin())
    }

    /// Support function `max u · x` over the boundary.
    pub fn support(&self, u: &Vector2) -> f64 {
        let n = self.n();
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            best = best.max(self.vertices[i].coords.dot(u));
            let c = self.vertex(self.arc_center(i));
            let a = self.vertex(i) - c;
            let b = self.vertex(i + 1) - c;
            if a.perp(u) >= 0.0 && u.perp(&b) >= 0.0 {
                // radius taken from the data so malformed inputs report honestly
                best = best.max(c.coords.dot(u) + a.norm() * u.norm());
            }
        }
        best
    }

    pub fn width(&self, u: &Vector2) -> f64 {
        self.support(u) + self.support(&-u)
    }

    /// Membership in `∩ B(p_i, 1)`.
    pub fn contains(&self, p: &Point2, slack: f64) -> bool {
        self.vertices.iter().all(|v| (p - v).norm() <= 1.0 + slack)
    }

    /// Distance from `origin` to the boundary along the unit direction `w`;
    /// `origin` must be interior.
    pub fn ray_exit(&self, origin: &Point2, w: &Vector2) -> f64 {
        self.vertices
            .iter()
            .map(|p| {
                let d = origin - p;
                let b = d.dot(w);
                let c = d.norm_squared() - 1.0;
                -b + (b * b - c).max(0.0).sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn centroid(&self) -> Point2 {
        let s: Vector2 = self.vertices.iter().map(|v| v.coords).sum();
        Point2::from(s / self.n() as f64)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_vertices(self.vertices.iter().map(|v| v * factor).collect())
    }

    /// Checks every defining property and reports the worst residual of each.
    pub fn validate(&self, tol: &Tolerance) -> Report {
        let mut report = Report::new();
        let n = self.n();
        report.push_detail("odd_vertex_count", n >= 3 && n % 2 == 1, 0.0, format!("n = {n}"));
        if n < 3 {
            return report;
        }

        let mut area2 = 0.0;
        for i in 0..n {
            area2 += self.vertex(i).coords.perp(&self.vertex(i + 1).coords);
        }
        report.push("counterclockwise", area2 > 0.0, area2 / 2.0);

        let mut max_d: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                max_d = max_d.max((self.vertices[i] - self.vertices[j]).norm());
            }
        }
        report.push("pairwise_distance", max_d <= 1.0 + tol.eq, (max_d - 1.0).max(0.0));

        let mut arc_res: f64 = 0.0;
        for i in 0..n {
            let c = self.vertex(self.arc_center(i));
            arc_res = arc_res
                .max(((self.vertex(i) - c).norm() - 1.0).abs())
                .max(((self.vertex(i + 1) - c).norm() - 1.0).abs());
        }
        report.push("arc_centers", arc_res <= tol.eq, arc_res);

        let mut width_res: f64 = 0.0;
        for k in 0..WIDTH_DIRECTIONS {
            let a = 2.0 * PI * k as f64 / WIDTH_DIRECTIONS as f64;
            let u = Vector2::new(a.cos(), a.sin());
            width_res = width_res.max((self.width(&u) - 1.0).abs());
        }
        report.push("constant_width", width_res <= tol.eq, width_res);
        report
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::EvenOrTooSmallN(n));
    }
    Ok(())
}

/// Regular Reuleaux polygon centered at the origin with its first vertex on +x.
pub fn make_regular(n: usize) -> Result<ReuleauxPolygon> {
    check_n(n)?;
    let r = 1.0 / (2.0 * (PI / (2.0 * n as f64)).cos());
    let vertices = (0..n)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / n as f64;
            Point2::new(r * a.cos(), r * a.sin())
        })
        .collect();
    Ok(ReuleauxPolygon::from_vertices(vertices))
}

/// Random Reuleaux polygon, deterministic in `seed`.
///
/// A unit segment starting at `[(0,0), (1,0)]` is pivoted alternately about
/// its two endpoints by angles `θ_0, …, θ_{n-1}`; the pivots visited are the
/// vertices. The angles must sum to π and satisfy the two closure equations
/// `Σ_{m=1..n} (-1)^m e^{iφ_m} = 0` with `φ_m = θ_0 + … + θ_{m-1}`. A random
/// target on the simplex is projected onto that constraint set by
/// minimum-norm Newton steps, then validated.
pub fn make_random(n: usize, seed: u64) -> Result<ReuleauxPolygon> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Tolerance::default();
    for _ in 0..MAX_ATTEMPTS {
        let weights: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = weights.iter().sum();
        let target: Vec<f64> = weights
            .iter()
            .map(|w| 0.5 * PI / n as f64 + 0.5 * PI * w / total)
            .collect();
        let Some(angles) = close_angles(&target) else {
            continue;
        };
        if angles.iter().any(|&a| a < MIN_ARC_ANGLE) {
            continue;
        }
        let poly = polygon_from_pivot_angles(&angles);
        if (0..n).any(|i| poly.arc_angle(i) < MIN_ARC_ANGLE) {
            continue;
        }
        if poly.validate(&tol).pass() {
            return Ok(poly);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

/// Constraint residual `[Σθ - π, Re r, Im r]` and its Jacobian rows.
fn closure_system(theta: &[f64]) -> ([f64; 3], [Vec<f64>; 3]) {
    let n = theta.len();
    let mut phi = 0.0;
    let mut terms = Vec::with_capacity(n);
    for (m, t) in theta.iter().enumerate() {
        phi += t;
        let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
        terms.push((sign * phi.cos(), sign * phi.sin()));
    }
    let (re, im) = terms.iter().fold((0.0, 0.0), |a, t| (a.0 + t.0, a.1 + t.1));
    let sum: f64 = theta.iter().sum();
    // d r / d θ_l = Σ_{m ≥ l} i · term_m
    let mut jr = vec![0.0; n];
    let mut ji = vec![0.0; n];
    let (mut acc_re, mut acc_im) = (0.0, 0.0);
    for l in (0..n).rev() {
        acc_re += terms[l].0;
        acc_im += terms[l].1;
        jr[l] = -acc_im;
        ji[l] = acc_re;
    }
    ([sum - PI, re, im], [vec![1.0; n], jr, ji])
}

fn close_angles(target: &[f64]) -> Option<Vec<f64>> {
    let mut theta = target.to_vec();
    for _ in 0..60 {
        let (g, j) = closure_system(&theta);
        let norm = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm < 1e-15 {
            return Some(theta);
        }
        let mut jjt = nalgebra::Matrix3::zeros();
        for r in 0..3 {
            for c in 0..3 {
                jjt[(r, c)] = j[r].iter().zip(&j[c]).map(|(a, b)| a * b).sum();
            }
        }
        let y = jjt.lu().solve(&nalgebra::Vector3::new(g[0], g[1], g[2]))?;
        for (l, t) in theta.iter_mut().enumerate() {
            *t -= j[0][l] * y[0] + j[1][l] * y[1] + j[2][l] * y[2];
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return None;
        }
    }
    let (g, _) = closure_system(&theta);
    (g.iter().all(|v| v.abs() < 1e-13)).then_some(theta)
}

/// Builds the vertex list from closed pivot angles.
fn polygon_from_pivot_angles(theta: &[f64]) -> ReuleauxPolygon {
    let n = theta.len();
    let k = n.div_ceil(2);
    // q_0 = (0,0), q_1 = (1,0), q_{m+1} = 1 + Σ_{l=1..m} (-1)^l e^{iφ_l}
    let mut q = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
    let (mut x, mut y, mut phi) = (1.0, 0.0, 0.0);
    for (m, t) in theta.iter().enumerate().take(n - 2) {
        phi += t;
        let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
        x += sign * phi.cos();
        y += sign * phi.sin();
        q.push(Point2::new(x, y));
    }
    let mut vertices = vec![Point2::origin(); n];
    for (j, p) in q.into_iter().enumerate() {
        vertices[(j * k) % n] = p;
    }
    ReuleauxPolygon::from_vertices(vertices)
}
