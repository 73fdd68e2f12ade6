//! Design rule checks against the print-process limits.
//!
//! Traces are treated as capsules around their centerlines (the synthesized
//! channel is a box plus end joints, which the capsule circumscribes), so
//! every clearance is a centerline distance minus half-widths. Violations
//! carry the measured value, the limit it broke, and a board location.
//!
//! Via barrels get no dedicated clearance rule of their own; they are
//! checked against the same wall minimum as traces, width taken as the
//! bore diameter. Reports should state that assumption.
//!
//! Subject identifiers are derived from geometry rather than input order,
//! so the violation set is identical no matter how the file lists its
//! elements.

use crate::pcb_model::{PcbDesign, Segment, Via};
use crate::process::ProcessParams;
use nalgebra::{Point2, Vector2};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum DrcRule {
    TraceWidth,
    TraceClearance,
    EdgeClearance,
    PadPitch,
    ViaDiameter,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrcViolation {
    pub rule: DrcRule,
    /// Geometry-derived element names, sorted.
    pub subjects: Vec<String>,
    pub measured: f64,
    pub limit: f64,
    /// A representative board location, typically between the subjects.
    pub location: [f64; 2],
    pub layer: Option<usize>,
}

/// Minimum distance between two 2D segments.
pub fn segment_distance(
    a0: Point2<f64>,
    a1: Point2<f64>,
    b0: Point2<f64>,
    b1: Point2<f64>,
) -> f64 {
    let (d, _, _) = segment_closest_points(a0, a1, b0, b1);
    d
}

/// Minimum distance plus the realizing closest point pair.
pub fn segment_closest_points(
    a0: Point2<f64>,
    a1: Point2<f64>,
    b0: Point2<f64>,
    b1: Point2<f64>,
) -> (f64, Point2<f64>, Point2<f64>) {
    let d1 = a1 - a0;
    let d2 = b1 - b0;
    let r = a0 - b0;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);

    let (s, t);
    if a == 0.0 && e == 0.0 {
        (s, t) = (0.0, 0.0);
    } else if a == 0.0 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e == 0.0 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s0 = if denom != 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                // Parallel: any point on the overlap is optimal.
                0.0
            };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                s = s0;
                t = t0;
            }
        }
    }
    let pa = a0 + d1 * s;
    let pb = b0 + d2 * t;
    ((pa - pb).norm(), pa, pb)
}

/// Runs every rule and returns the violations in canonical order:
/// sorted by rule, then subjects, then measured value.
pub fn run_drc(design: &PcbDesign, params: &ProcessParams) -> Vec<DrcViolation> {
    let mut out = Vec::new();
    check_trace_width(design, params, &mut out);
    check_trace_clearance(design, params, &mut out);
    check_edge_clearance(design, params, &mut out);
    check_pad_pitch(design, params, &mut out);
    check_via_diameter(design, params, &mut out);
    out.sort_by(|a, b| {
        (a.rule, &a.subjects)
            .cmp(&(b.rule, &b.subjects))
            .then(a.measured.total_cmp(&b.measured))
    });
    out
}

fn seg_id(seg: &Segment) -> String {
    format!(
        "seg L{} ({:.4},{:.4})-({:.4},{:.4})",
        seg.layer, seg.start.x, seg.start.y, seg.end.x, seg.end.y
    )
}

fn via_id(via: &Via) -> String {
    format!("via ({:.4},{:.4})", via.at.x, via.at.y)
}

fn check_trace_width(design: &PcbDesign, params: &ProcessParams, out: &mut Vec<DrcViolation>) {
    for seg in &design.segments {
        if seg.width < params.trace_width_min {
            let mid = nalgebra::center(&seg.start, &seg.end);
            out.push(DrcViolation {
                rule: DrcRule::TraceWidth,
                subjects: vec![seg_id(seg)],
                measured: seg.width,
                limit: params.trace_width_min,
                location: [mid.x, mid.y],
                layer: Some(seg.layer),
            });
        }
    }
}

/// Conductor-to-conductor spacing on shared layers. Elements of the same
/// net are allowed to touch; everything else needs a printable wall.
fn check_trace_clearance(design: &PcbDesign, params: &ProcessParams, out: &mut Vec<DrcViolation>) {
    let push = |subjects: [String; 2],
                    gap: f64,
                    location: Point2<f64>,
                    layer: Option<usize>,
                    out: &mut Vec<DrcViolation>| {
        if gap < params.wall_xy_min {
            let mut subjects = subjects.to_vec();
            subjects.sort();
            out.push(DrcViolation {
                rule: DrcRule::TraceClearance,
                subjects,
                measured: gap,
                limit: params.wall_xy_min,
                location: [location.x, location.y],
                layer,
            });
        }
    };

    let segs = &design.segments;
    for (i, a) in segs.iter().enumerate() {
        for b in &segs[i + 1..] {
            if a.net == b.net || a.layer != b.layer {
                continue;
            }
            let (d, pa, pb) = segment_closest_points(a.start, a.end, b.start, b.end);
            let gap = d - (a.width + b.width) / 2.0;
            push(
                [seg_id(a), seg_id(b)],
                gap,
                nalgebra::center(&pa, &pb),
                Some(a.layer),
                out,
            );
        }
    }

    for via in &design.vias {
        for seg in segs {
            if via.net == seg.net || seg.layer < via.layer_from || seg.layer > via.layer_to {
                continue;
            }
            let (d, pa, _) = segment_closest_points(seg.start, seg.end, via.at, via.at);
            let gap = d - (seg.width + via.diameter) / 2.0;
            push(
                [seg_id(seg), via_id(via)],
                gap,
                nalgebra::center(&pa, &via.at),
                Some(seg.layer),
                out,
            );
        }
    }

    for (i, a) in design.vias.iter().enumerate() {
        for b in &design.vias[i + 1..] {
            if a.net == b.net || a.layer_from > b.layer_to || b.layer_from > a.layer_to {
                continue;
            }
            let gap = (a.at - b.at).norm() - (a.diameter + b.diameter) / 2.0;
            push(
                [via_id(a), via_id(b)],
                gap,
                nalgebra::center(&a.at, &b.at),
                None,
                out,
            );
        }
    }
}

/// Channel boundary to board edge. The outline is tessellated once and
/// each conductor is measured against every outline chord.
fn check_edge_clearance(design: &PcbDesign, params: &ProcessParams, out: &mut Vec<DrcViolation>) {
    let mut chords: Vec<(Point2<f64>, Point2<f64>)> = Vec::new();
    for elem in &design.outline {
        if let Ok(points) = elem.tessellate(0.01) {
            for pair in points.windows(2) {
                chords.push((pair[0], pair[1]));
            }
        }
    }
    if chords.is_empty() {
        return;
    }

    let distance_to_edge = |p0: Point2<f64>, p1: Point2<f64>| {
        let mut best = (f64::INFINITY, p0, p0);
        for &(e0, e1) in &chords {
            let (d, pa, pb) = segment_closest_points(p0, p1, e0, e1);
            if d < best.0 {
                best = (d, pa, pb);
            }
        }
        best
    };

    for seg in &design.segments {
        let (d, pa, pb) = distance_to_edge(seg.start, seg.end);
        let gap = d - seg.width / 2.0;
        if gap < params.wall_xy_min {
            let mid = nalgebra::center(&pa, &pb);
            out.push(DrcViolation {
                rule: DrcRule::EdgeClearance,
                subjects: vec![seg_id(seg), "edge".to_string()],
                measured: gap,
                limit: params.wall_xy_min,
                location: [mid.x, mid.y],
                layer: Some(seg.layer),
            });
        }
    }
    for via in &design.vias {
        let (d, pa, pb) = distance_to_edge(via.at, via.at);
        let gap = d - via.diameter / 2.0;
        if gap < params.wall_xy_min {
            let mid = nalgebra::center(&pa, &pb);
            out.push(DrcViolation {
                rule: DrcRule::EdgeClearance,
                subjects: vec!["edge".to_string(), via_id(via)],
                measured: gap,
                limit: params.wall_xy_min,
                location: [mid.x, mid.y],
                layer: None,
            });
        }
    }
}

/// Edge-to-edge spacing of differently-netted pads within one footprint.
fn check_pad_pitch(design: &PcbDesign, params: &ProcessParams, out: &mut Vec<DrcViolation>) {
    for fp in &design.footprints {
        for (i, a) in fp.pads.iter().enumerate() {
            for b in &fp.pads[i + 1..] {
                if a.net.is_some() && a.net == b.net {
                    continue;
                }
                let (ca, yaw_a) = fp.pad_placement(a);
                let (cb, yaw_b) = fp.pad_placement(b);
                let gap = oriented_rect_distance(ca, a.size / 2.0, yaw_a, cb, b.size / 2.0, yaw_b);
                if gap < params.wall_xy_min {
                    let mid = nalgebra::center(&ca, &cb);
                    let mut subjects = vec![
                        format!("{}.{}", fp.reference, a.number),
                        format!("{}.{}", fp.reference, b.number),
                    ];
                    subjects.sort();
                    out.push(DrcViolation {
                        rule: DrcRule::PadPitch,
                        subjects,
                        measured: gap,
                        limit: params.wall_xy_min,
                        location: [mid.x, mid.y],
                        layer: None,
                    });
                }
            }
        }
    }
}

fn check_via_diameter(design: &PcbDesign, params: &ProcessParams, out: &mut Vec<DrcViolation>) {
    for via in &design.vias {
        if via.diameter < params.via_diameter {
            out.push(DrcViolation {
                rule: DrcRule::ViaDiameter,
                subjects: vec![via_id(via)],
                measured: via.diameter,
                limit: params.via_diameter,
                location: [via.at.x, via.at.y],
                layer: None,
            });
        }
    }
}

/// Distance between two oriented rectangles; zero when they intersect.
pub fn oriented_rect_distance(
    c1: Point2<f64>,
    half1: Vector2<f64>,
    yaw1_deg: f64,
    c2: Point2<f64>,
    half2: Vector2<f64>,
    yaw2_deg: f64,
) -> f64 {
    let corners = |c: Point2<f64>, h: Vector2<f64>, yaw: f64| -> [Point2<f64>; 4] {
        let (sin, cos) = yaw.to_radians().sin_cos();
        let rot = |x: f64, y: f64| Point2::new(c.x + x * cos - y * sin, c.y + x * sin + y * cos);
        [
            rot(-h.x, -h.y),
            rot(h.x, -h.y),
            rot(h.x, h.y),
            rot(-h.x, h.y),
        ]
    };
    let r1 = corners(c1, half1, yaw1_deg);
    let r2 = corners(c2, half2, yaw2_deg);

    let inside = |p: Point2<f64>, c: Point2<f64>, h: Vector2<f64>, yaw: f64| {
        let (sin, cos) = yaw.to_radians().sin_cos();
        let d = p - c;
        let lx = d.x * cos + d.y * sin;
        let ly = -d.x * sin + d.y * cos;
        lx.abs() <= h.x && ly.abs() <= h.y
    };
    // Edge crossings give distance 0 below; full containment would not.
    if inside(c1, c2, half2, yaw2_deg) || inside(c2, c1, half1, yaw1_deg) {
        return 0.0;
    }

    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in 0..4 {
            let d = segment_distance(r1[i], r1[(i + 1) % 4], r2[j], r2[(j + 1) % 4]);
            best = best.min(d);
        }
    }
    best
}
