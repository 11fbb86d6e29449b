//! Constant-width Meissner polyhedra built from Reuleaux polygons.
//!
//! Pipeline: a [`ReuleauxPolygon`] of width 1 → its farthest-point Voronoi
//! diagram ([`fpvd`]) → the lifted center set and its ball polyhedron
//! ([`ballpoly`]) → surgery on one edge of every dual pair ([`surgery`]) →
//! numerical verification ([`analysis`]) and meshing ([`mesh`], [`io`]).

pub mod analysis;
pub mod ballpoly;
pub mod error;
pub mod fpvd;
pub mod geom;
pub mod io;
pub mod mesh;
pub mod report;
pub mod reuleaux;
pub mod surgery;

pub use error::{Error, Result};
pub use analysis::{constant_width_check, skeleton_width, DirectionSampler, WidthReport};
pub use ballpoly::{lift, ReuleauxPolyhedron};
pub use fpvd::{farthest_point_diagram, FarthestPointDiagram};
pub use geom::{Arc3, Point2, Point3, Tolerance, UnitVector3, Vector2, Vector3};
pub use report::{Check, Report};
pub use mesh::{tessellate, TriangleMesh};
pub use reuleaux::{make_random, make_regular, ReuleauxPolygon};
pub use surgery::{perform_surgery, MeissnerSolid, SurgeryChoice};
