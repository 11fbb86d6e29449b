//! Geometric kernel: points, arcs in space, spheres and toleranced predicates.
//!
//! Every construction in the crate works at width 1, so unit spheres are the
//! common case and several helpers hard-code radius 1.

use std::f64::consts::{PI, TAU};

use nalgebra as na;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = na::Point2<f64>;
pub type Point3 = na::Point3<f64>;
pub type Vector2 = na::Vector2<f64>;
pub type Vector3 = na::Vector3<f64>;
pub type UnitVector3 = na::Unit<Vector3>;

/// Tolerances for toleranced equality tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Distance-equality tolerance.
    pub eq: f64,
    /// Geometric resolution of tessellated output.
    pub mesh: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { eq: 1e-9, mesh: 1e-3 }
    }
}

impl Tolerance {
    pub fn new(eq: f64, mesh: f64) -> Result<Self> {
        if !(eq > 0.0 && eq < 1e-3) {
            return Err(Error::InvalidTolerance(eq));
        }
        Ok(Self { eq, mesh })
    }

    pub fn with_eq(eq: f64) -> Result<Self> {
        Self::new(eq, Self::default().mesh)
    }

    /// Threshold under which two derived points or radii are merged.
    pub fn merge(&self) -> f64 {
        10.0 * self.eq
    }

    pub fn is_unit(&self, d: f64) -> bool {
        (d - 1.0).abs() <= self.eq
    }
}

/// Normalizes an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Angle between two vectors, robust near 0 and π.
pub fn angle_between(a: &Vector3, b: &Vector3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Spherical linear interpolation between two unit vectors.
pub fn slerp(a: &Vector3, b: &Vector3, t: f64) -> Vector3 {
    let omega = angle_between(a, b);
    if omega < 1e-15 {
        return *a;
    }
    let s = omega.sin();
    a * (((1.0 - t) * omega).sin() / s) + b * ((t * omega).sin() / s)
}

/// Deterministic orthonormal basis `(e1, e2)` of the plane orthogonal to `n`,
/// with `e1 × e2 = n`.
pub fn plane_basis(n: &Vector3) -> (Vector3, Vector3) {
    let a = n.map(f64::abs);
    let helper = if a.x <= a.y && a.x <= a.z {
        Vector3::x()
    } else if a.y <= a.z {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = (helper - n * helper.dot(n)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// A closed ball / sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Point3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Point3, radius: f64) -> Self {
        debug_assert!(radius > 0.0 && radius.is_finite());
        Self { center, radius }
    }

    pub fn unit(center: Point3) -> Self {
        Self::new(center, 1.0)
    }

    /// Ball membership with additive slack on the distance.
    pub fn contains(&self, p: &Point3, slack: f64) -> bool {
        (p - self.center).norm() <= self.radius + slack
    }

    /// Signed distance of `p` from the sphere surface.
    pub fn residual(&self, p: &Point3) -> f64 {
        (p - self.center).norm() - self.radius
    }
}

/// Intersection points of three unit spheres. Empty when the centers are
/// (nearly) collinear or the spheres miss each other.
pub fn unit_sphere_triple(c1: &Point3, c2: &Point3, c3: &Point3) -> Vec<Point3> {
    let d12 = c2 - c1;
    let d = d12.norm();
    if d < 1e-12 {
        return Vec::new();
    }
    let ex = d12 / d;
    let d13 = c3 - c1;
    let i = ex.dot(&d13);
    let ey_raw = d13 - ex * i;
    let j = ey_raw.norm();
    if j < 1e-9 {
        return Vec::new();
    }
    let ey = ey_raw / j;
    let ez = ex.cross(&ey);
    let x = d / 2.0;
    let y = (i * i + j * j - 2.0 * i * x) / (2.0 * j);
    let z2 = 1.0 - x * x - y * y;
    if z2 < 0.0 {
        return Vec::new();
    }
    let base = c1 + ex * x + ey * y;
    if z2 == 0.0 {
        return vec![base];
    }
    let z = z2.sqrt();
    vec![base + ez * z, base - ez * z]
}

/// Circumscribed circle of three planar points.
pub fn circumcircle(p: &Point2, q: &Point2, r: &Point2, tol: &Tolerance) -> Result<(Point2, f64)> {
    let b = q - p;
    let c = r - p;
    let cross = b.x * c.y - b.y * c.x;
    let longest = b.norm().max(c.norm()).max((r - q).norm());
    // height of the triangle over its longest side
    if longest == 0.0 || cross.abs() / longest <= tol.eq {
        return Err(Error::CollinearInput);
    }
    let d = 2.0 * cross;
    let b2 = b.norm_squared();
    let c2 = c.norm_squared();
    let ux = (c.y * b2 - b.y * c2) / d;
    let uy = (b.x * c2 - c.x * b2) / d;
    let center = Point2::new(p.x + ux, p.y + uy);
    let radius = ((center - p).norm() + (center - q).norm() + (center - r).norm()) / 3.0;
    Ok((center, radius))
}

/// Circular arc in space: the points `center + radius (cos θ e1 + sin θ e2)`
/// for θ in `[start_angle, start_angle + sweep]`, where `(e1, e2)` is
/// [`plane_basis`] of `normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc3 {
    pub center: Point3,
    pub radius: f64,
    pub normal: Vector3,
    pub start_angle: f64,
    pub sweep: f64,
}

impl Arc3 {
    pub fn full_circle(center: Point3, radius: f64, normal: Vector3) -> Self {
        Self {
            center,
            radius,
            normal: normal.normalize(),
            start_angle: 0.0,
            sweep: TAU,
        }
    }

    /// Arc running counterclockwise about `normal` from `from` to `to`.
    /// Both points are projected onto the plane of the circle first.
    pub fn through(center: Point3, normal: Vector3, from: &Point3, to: &Point3) -> Self {
        let normal = normal.normalize();
        let a = angle_in_plane(&center, &normal, from);
        let b = angle_in_plane(&center, &normal, to);
        let mut sweep = normalize_angle(b - a);
        if sweep < 1e-15 {
            sweep = TAU;
        }
        let off = from - center;
        let radius = (off - normal * off.dot(&normal)).norm();
        Self {
            center,
            radius,
            normal,
            start_angle: a,
            sweep,
        }
    }

    pub fn basis(&self) -> (Vector3, Vector3) {
        plane_basis(&self.normal)
    }

    pub fn direction_at_angle(&self, theta: f64) -> Vector3 {
        let (e1, e2) = self.basis();
        e1 * theta.cos() + e2 * theta.sin()
    }

    pub fn point_at_angle(&self, theta: f64) -> Point3 {
        self.center + self.direction_at_angle(theta) * self.radius
    }

    /// Point at fraction `s ∈ [0, 1]` of the sweep.
    pub fn point_at(&self, s: f64) -> Point3 {
        self.point_at_angle(self.start_angle + s * self.sweep)
    }

    pub fn start_point(&self) -> Point3 {
        self.point_at(0.0)
    }

    pub fn end_point(&self) -> Point3 {
        self.point_at(1.0)
    }

    pub fn midpoint(&self) -> Point3 {
        self.point_at(0.5)
    }

    pub fn length(&self) -> f64 {
        self.radius * self.sweep
    }

    /// Maximum of `c · u` over the arc and a point attaining it.
    pub fn support(&self, u: &Vector3) -> (f64, Point3) {
        ArcFrame::new(self).support_point(u)
    }

    pub fn reversed(&self) -> Self {
        // flipping the normal mirrors the basis; recompute the start angle
        let end = self.end_point();
        let start = self.start_point();
        Self::through(self.center, -self.normal, &end, &start).with_radius(self.radius)
    }

    fn with_radius(mut self, r: f64) -> Self {
        self.radius = r;
        self
    }
}

fn angle_in_plane(center: &Point3, normal: &Vector3, p: &Point3) -> f64 {
    let (e1, e2) = plane_basis(normal);
    let d = p - center;
    normalize_angle(d.dot(&e2).atan2(d.dot(&e1)))
}

/// Precomputed frame of an [`Arc3`] for repeated support and distance queries.
#[derive(Debug, Clone, Copy)]
pub struct ArcFrame {
    pub center: Point3,
    pub radius: f64,
    pub normal: Vector3,
    /// Unit in-plane direction of the start point.
    pub start: Vector3,
    /// Unit in-plane direction of the end point.
    pub end: Vector3,
    pub sweep: f64,
}

impl ArcFrame {
    pub fn new(arc: &Arc3) -> Self {
        Self {
            center: arc.center,
            radius: arc.radius,
            normal: arc.normal,
            start: arc.direction_at_angle(arc.start_angle),
            end: arc.direction_at_angle(arc.start_angle + arc.sweep),
            sweep: arc.sweep,
        }
    }

    /// Whether the in-plane unit direction `w` lies in the angular span.
    pub fn spans(&self, w: &Vector3) -> bool {
        if self.sweep >= TAU - 1e-15 {
            return true;
        }
        let a = self.normal.dot(&self.start.cross(w));
        let b = self.normal.dot(&w.cross(&self.end));
        if self.sweep <= PI {
            a >= 0.0 && b >= 0.0
        } else {
            !(a < 0.0 && b < 0.0)
        }
    }

    /// `max v · w` over the unit directions `w` swept by the arc.
    pub fn unit_support(&self, v: &Vector3) -> f64 {
        let vp = v - self.normal * v.dot(&self.normal);
        let len = vp.norm();
        if len > 0.0 && self.spans(&(vp / len)) {
            return len;
        }
        v.dot(&self.start).max(v.dot(&self.end))
    }

    pub fn support(&self, u: &Vector3) -> f64 {
        self.center.coords.dot(u) + self.radius * self.unit_support(u)
    }

    pub fn support_point(&self, u: &Vector3) -> (f64, Point3) {
        let up = u - self.normal * u.dot(&self.normal);
        let len = up.norm();
        let dir = if len > 0.0 && self.spans(&(up / len)) {
            up / len
        } else if len == 0.0 || u.dot(&self.start) >= u.dot(&self.end) {
            self.start
        } else {
            self.end
        };
        let p = self.center + dir * self.radius;
        (p.coords.dot(u), p)
    }

    /// Largest squared distance from `q` to a point of the arc.
    pub fn max_distance_sq(&self, q: &Point3) -> f64 {
        let v = q - self.center;
        v.norm_squared() + self.radius * self.radius + 2.0 * self.radius * self.unit_support(&(-v))
    }
}

/// Point of the wedge surface: the minor unit-radius arc from `x` to `y`
/// centered at `dual_arc(s)`, evaluated at fraction `t`.
pub fn point_on_wedge_arc_family(
    x: &Point3,
    y: &Point3,
    dual_arc: &Arc3,
    s: f64,
    t: f64,
    tol: &Tolerance,
) -> Result<Point3> {
    let c = dual_arc.point_at(s);
    let residual = ((x - c).norm() - 1.0).abs().max(((y - c).norm() - 1.0).abs());
    if residual > tol.eq {
        return Err(Error::BadDualArc { residual });
    }
    if t <= 0.0 {
        return Ok(*x);
    }
    if t >= 1.0 {
        return Ok(*y);
    }
    let a = (x - c).normalize();
    let b = (y - c).normalize();
    Ok(c + slerp(&a, &b, t))
}
