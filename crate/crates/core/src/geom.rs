//! Constructive solid geometry kernel.
//!
//! Solids are closed point sets built from three Z-aligned primitives and
//! three boolean combinators. Two queries are offered with different
//! guarantees:
//!
//! - [`Solid::contains`] is exact membership (boundaries count as inside).
//! - [`Solid::sdf`] is an exact signed distance for primitives and a
//!   min/max bound for booleans: the sign is always correct away from the
//!   surface, but inside a `Difference` the magnitude may underestimate
//!   the true distance. That is exactly what marching cubes needs.
//!
//! Volumes are measured by counting cell centers on a regular grid, which
//! is deterministic and comes with an explicit error bound: the surface
//! can only pass through cells whose occupancy differs from a neighbor,
//! so the count of those cells times the cell volume bounds the error.

use nalgebra::{Point2, Point3, Vector2, Vector3};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("solid has no finite bounding box")]
    UnboundedSolid,
    #[error("volume grid would need {cells} cells; use a coarser pitch")]
    GridTooLarge { cells: usize },
}

/// Axis-aligned bounding box. The empty box is represented by inverted
/// infinite bounds so that union folds need no special cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn intersection(&self, other: &Aabb) -> Aabb {
        let out = Aabb {
            min: self.min.sup(&other.min),
            max: self.max.inf(&other.max),
        };
        if out.is_empty() {
            Aabb::EMPTY
        } else {
            out
        }
    }

    pub fn contains_point(&self, p: Point3<f64>) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    pub fn extents(&self) -> Vector3<f64> {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solid {
    /// Rectangular block rotated about the Z axis.
    BoxZ {
        center: Point3<f64>,
        half_extents: Vector3<f64>,
        yaw_deg: f64,
    },
    /// Upright cylinder; `base_center` is the middle of the bottom face.
    CylinderZ {
        base_center: Point3<f64>,
        radius: f64,
        height: f64,
    },
    /// Simple polygon extruded from `z0` to `z1`. Counterclockwise.
    ExtrudedPolygon {
        polygon: Vec<Point2<f64>>,
        z0: f64,
        z1: f64,
    },
    Union(Vec<Solid>),
    Difference {
        base: Box<Solid>,
        subtrahends: Vec<Solid>,
    },
    Intersection(Vec<Solid>),
    /// The empty set. Used where an element contributes no material,
    /// e.g. the opening of a through-hole pad that is already a cavity.
    Empty,
}

impl Solid {
    pub fn box_z(center: Point3<f64>, half_extents: Vector3<f64>, yaw_deg: f64) -> Solid {
        Solid::BoxZ {
            center,
            half_extents,
            yaw_deg,
        }
    }

    pub fn cylinder_z(base_center: Point3<f64>, radius: f64, height: f64) -> Solid {
        Solid::CylinderZ {
            base_center,
            radius,
            height,
        }
    }

    /// Builds the extrusion, normalizing the polygon to counterclockwise
    /// order and `z0 <= z1`.
    pub fn extruded_polygon(mut polygon: Vec<Point2<f64>>, z0: f64, z1: f64) -> Solid {
        if polygon_signed_area(&polygon) < 0.0 {
            polygon.reverse();
        }
        Solid::ExtrudedPolygon {
            polygon,
            z0: z0.min(z1),
            z1: z0.max(z1),
        }
    }

    /// Union that drops empty members outright.
    pub fn union_of(solids: Vec<Solid>) -> Solid {
        let mut kept: Vec<Solid> = solids
            .into_iter()
            .filter(|s| !matches!(s, Solid::Empty))
            .collect();
        match kept.len() {
            0 => Solid::Empty,
            1 => kept.pop().unwrap(),
            _ => Solid::Union(kept),
        }
    }

    pub fn difference(base: Solid, subtrahends: Vec<Solid>) -> Solid {
        let kept: Vec<Solid> = subtrahends
            .into_iter()
            .filter(|s| !matches!(s, Solid::Empty))
            .collect();
        if kept.is_empty() {
            base
        } else {
            Solid::Difference {
                base: Box::new(base),
                subtrahends: kept,
            }
        }
    }

    /// Exact membership; all solids are closed sets.
    pub fn contains(&self, p: Point3<f64>) -> bool {
        match self {
            Solid::BoxZ {
                center,
                half_extents,
                yaw_deg,
            } => {
                let local = into_box_frame(p, *center, *yaw_deg);
                local.x.abs() <= half_extents.x
                    && local.y.abs() <= half_extents.y
                    && local.z.abs() <= half_extents.z
            }
            Solid::CylinderZ {
                base_center,
                radius,
                height,
            } => {
                p.z >= base_center.z
                    && p.z <= base_center.z + height
                    && (p.xy() - base_center.xy()).norm_squared() <= radius * radius
            }
            Solid::ExtrudedPolygon { polygon, z0, z1 } => {
                p.z >= *z0 && p.z <= *z1 && polygon_contains(polygon, p.xy())
            }
            Solid::Union(children) => children.iter().any(|c| c.contains(p)),
            Solid::Intersection(children) => {
                !children.is_empty() && children.iter().all(|c| c.contains(p))
            }
            Solid::Difference { base, subtrahends } => {
                base.contains(p) && !subtrahends.iter().any(|c| c.contains(p))
            }
            Solid::Empty => false,
        }
    }

    /// Signed distance: negative inside, positive outside. Exact for
    /// primitives, a correct-signed bound for boolean nodes.
    pub fn sdf(&self, p: Point3<f64>) -> f64 {
        match self {
            Solid::BoxZ {
                center,
                half_extents,
                yaw_deg,
            } => {
                let local = into_box_frame(p, *center, *yaw_deg);
                let q = Vector3::new(
                    local.x.abs() - half_extents.x,
                    local.y.abs() - half_extents.y,
                    local.z.abs() - half_extents.z,
                );
                let outside = Vector3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
                outside + q.x.max(q.y).max(q.z).min(0.0)
            }
            Solid::CylinderZ {
                base_center,
                radius,
                height,
            } => {
                let radial = (p.xy() - base_center.xy()).norm() - radius;
                let axial = (p.z - base_center.z - height / 2.0).abs() - height / 2.0;
                let outside =
                    Vector2::new(radial.max(0.0), axial.max(0.0)).norm();
                outside + radial.max(axial).min(0.0)
            }
            Solid::ExtrudedPolygon { polygon, z0, z1 } => {
                let planar = polygon_sdf(polygon, p.xy());
                let axial = (p.z - (z0 + z1) / 2.0).abs() - (z1 - z0) / 2.0;
                let outside = Vector2::new(planar.max(0.0), axial.max(0.0)).norm();
                outside + planar.max(axial).min(0.0)
            }
            Solid::Union(children) => children
                .iter()
                .map(|c| c.sdf(p))
                .fold(f64::INFINITY, f64::min),
            Solid::Intersection(children) => {
                if children.is_empty() {
                    f64::INFINITY
                } else {
                    children
                        .iter()
                        .map(|c| c.sdf(p))
                        .fold(f64::NEG_INFINITY, f64::max)
                }
            }
            Solid::Difference { base, subtrahends } => {
                let cut = subtrahends
                    .iter()
                    .map(|c| c.sdf(p))
                    .fold(f64::INFINITY, f64::min);
                base.sdf(p).max(-cut)
            }
            Solid::Empty => f64::INFINITY,
        }
    }

    /// Conservative bounding box. A `Difference` keeps its base's box; an
    /// empty solid yields [`Aabb::EMPTY`].
    pub fn bbox(&self) -> Aabb {
        match self {
            Solid::BoxZ {
                center,
                half_extents,
                yaw_deg,
            } => {
                let (sin, cos) = yaw_deg.to_radians().sin_cos();
                let ex = half_extents.x * cos.abs() + half_extents.y * sin.abs();
                let ey = half_extents.x * sin.abs() + half_extents.y * cos.abs();
                Aabb {
                    min: Point3::new(center.x - ex, center.y - ey, center.z - half_extents.z),
                    max: Point3::new(center.x + ex, center.y + ey, center.z + half_extents.z),
                }
            }
            Solid::CylinderZ {
                base_center,
                radius,
                height,
            } => Aabb {
                min: Point3::new(
                    base_center.x - radius,
                    base_center.y - radius,
                    base_center.z,
                ),
                max: Point3::new(
                    base_center.x + radius,
                    base_center.y + radius,
                    base_center.z + height,
                ),
            },
            Solid::ExtrudedPolygon { polygon, z0, z1 } => {
                let mut bb = Aabb::EMPTY;
                for p in polygon {
                    bb.min = Point3::new(bb.min.x.min(p.x), bb.min.y.min(p.y), *z0);
                    bb.max = Point3::new(bb.max.x.max(p.x), bb.max.y.max(p.y), *z1);
                }
                bb
            }
            Solid::Union(children) => children
                .iter()
                .fold(Aabb::EMPTY, |acc, c| acc.union(&c.bbox())),
            Solid::Intersection(children) => {
                let mut iter = children.iter();
                match iter.next() {
                    None => Aabb::EMPTY,
                    Some(first) => iter.fold(first.bbox(), |acc, c| acc.intersection(&c.bbox())),
                }
            }
            Solid::Difference { base, .. } => base.bbox(),
            Solid::Empty => Aabb::EMPTY,
        }
    }
}

fn into_box_frame(p: Point3<f64>, center: Point3<f64>, yaw_deg: f64) -> Vector3<f64> {
    let d = p - center;
    let (sin, cos) = yaw_deg.to_radians().sin_cos();
    Vector3::new(d.x * cos + d.y * sin, -d.x * sin + d.y * cos, d.z)
}

/// Shoelace area: positive for counterclockwise polygons.
pub fn polygon_signed_area(polygon: &[Point2<f64>]) -> f64 {
    let mut area = 0.0;
    for (i, p) in polygon.iter().enumerate() {
        let q = polygon[(i + 1) % polygon.len()];
        area += p.x * q.y - q.x * p.y;
    }
    area / 2.0
}

/// Closed-set point-in-polygon: boundary points are members.
pub fn polygon_contains(polygon: &[Point2<f64>], p: Point2<f64>) -> bool {
    if polygon.len() < 3 {
        return false;
    }
    // On-edge first; the crossing count below is unreliable exactly on
    // the boundary.
    for (i, a) in polygon.iter().enumerate() {
        let b = polygon[(i + 1) % polygon.len()];
        if point_segment_distance_sq(p, *a, b) <= 1e-24 {
            return true;
        }
    }
    let mut inside = false;
    for (i, a) in polygon.iter().enumerate() {
        let b = polygon[(i + 1) % polygon.len()];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Exact signed distance to a simple polygon, negative inside.
pub fn polygon_sdf(polygon: &[Point2<f64>], p: Point2<f64>) -> f64 {
    if polygon.len() < 3 {
        return f64::INFINITY;
    }
    let mut dist_sq = f64::INFINITY;
    let mut sign = 1.0;
    let mut j = polygon.len() - 1;
    for i in 0..polygon.len() {
        let (vi, vj) = (polygon[i], polygon[j]);
        let e = vj - vi;
        let w = p - vi;
        let t = (w.dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        dist_sq = dist_sq.min((w - e * t).norm_squared());
        // Winding parity flip (works for either polygon orientation).
        let c0 = p.y >= vi.y;
        let c1 = p.y < vj.y;
        let c2 = e.x * w.y > e.y * w.x;
        if (c0 && c1 && c2) || (!c0 && !c1 && !c2) {
            sign = -sign;
        }
        j = i;
    }
    sign * dist_sq.sqrt()
}

fn point_segment_distance_sq(p: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    let e = b - a;
    let len_sq = e.norm_squared();
    if len_sq == 0.0 {
        return (p - a).norm_squared();
    }
    let t = ((p - a).dot(&e) / len_sq).clamp(0.0, 1.0);
    (p - (a + e * t)).norm_squared()
}

/// Grid-counting volume estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeEstimate {
    /// Occupied cell count times cell volume, mm^3.
    pub value: f64,
    /// Surface-adjacent cell count times cell volume, mm^3.
    pub error_bound: f64,
    pub occupied_cells: usize,
    pub surface_cells: usize,
}

impl VolumeEstimate {
    pub const ZERO: VolumeEstimate = VolumeEstimate {
        value: 0.0,
        error_bound: 0.0,
        occupied_cells: 0,
        surface_cells: 0,
    };
}

const MAX_VOLUME_CELLS: usize = 1 << 30;

/// Measures `s` by testing cell-center membership on a grid of the given
/// pitch over the solid's bounding box. Deterministic for fixed inputs.
pub fn volume(s: &Solid, pitch: f64) -> Result<VolumeEstimate, GeomError> {
    assert!(pitch > 0.0, "volume pitch must be positive");
    let bb = s.bbox();
    if bb.is_empty() {
        return Ok(VolumeEstimate::ZERO);
    }
    let ext = bb.extents();
    if !(ext.x.is_finite() && ext.y.is_finite() && ext.z.is_finite()) {
        return Err(GeomError::UnboundedSolid);
    }
    let cells_along = |len: f64| ((len / pitch).ceil() as usize).max(1);
    let (nx, ny, nz) = (cells_along(ext.x), cells_along(ext.y), cells_along(ext.z));
    let total = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .filter(|&v| v <= MAX_VOLUME_CELLS)
        .ok_or(GeomError::GridTooLarge {
            cells: usize::MAX,
        })?;

    // Occupancy by z-slab, sampled in parallel; everything after that is
    // a cheap sequential pass.
    let slabs: Vec<Vec<bool>> = (0..nz)
        .into_par_iter()
        .map(|k| {
            let z = bb.min.z + (k as f64 + 0.5) * pitch;
            let mut slab = vec![false; nx * ny];
            for j in 0..ny {
                let y = bb.min.y + (j as f64 + 0.5) * pitch;
                for i in 0..nx {
                    let x = bb.min.x + (i as f64 + 0.5) * pitch;
                    slab[j * nx + i] = s.contains(Point3::new(x, y, z));
                }
            }
            slab
        })
        .collect();

    let at = |i: isize, j: isize, k: isize| -> bool {
        if i < 0 || j < 0 || k < 0 || i >= nx as isize || j >= ny as isize || k >= nz as isize {
            return false;
        }
        slabs[k as usize][j as usize * nx + i as usize]
    };

    let mut occupied = 0usize;
    let mut surface = 0usize;
    for k in 0..nz as isize {
        for j in 0..ny as isize {
            for i in 0..nx as isize {
                let own = at(i, j, k);
                if own {
                    occupied += 1;
                }
                let boundary = [
                    at(i - 1, j, k),
                    at(i + 1, j, k),
                    at(i, j - 1, k),
                    at(i, j + 1, k),
                    at(i, j, k - 1),
                    at(i, j, k + 1),
                ]
                .iter()
                .any(|&n| n != own);
                if boundary {
                    surface += 1;
                }
            }
        }
    }
    let _ = total;
    let cell = pitch * pitch * pitch;
    Ok(VolumeEstimate {
        value: occupied as f64 * cell,
        error_bound: surface as f64 * cell,
        occupied_cells: occupied,
        surface_cells: surface,
    })
}
