//! Solid synthesis: builds the printable board from an extracted design.
//!
//! Each copper element becomes a hollow channel: traces are boxes with a
//! cylindrical joint at both ends, vias are cylinders spanning their layer
//! range, and SMD pads are thin cuboids that open the network to the board
//! face. Component sockets become subtractive cavities shaped per package.
//! The body is the outline polygon extruded to the stackup height, and the
//! final board is one global boolean: body minus channels minus cavities.

use crate::drc::run_drc;
use crate::geom::{self, Solid, VolumeEstimate};
use crate::pcb_model::{
    sort_outline, Footprint, ModelError, NetId, OutlineElem, Pad, PadKind, PcbDesign, Segment,
    Side, SortedOutline, Via,
};
use crate::process::{ProcessParams, Stackup, VIA_DIAMETER_FLOOR};
use crate::socket::{SocketError, SocketKind, SocketLibrary};
use nalgebra::{Point2, Point3, Vector3};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("element on layer {layer}, but the stackup has {layers} layers")]
    LayerOutOfRange { layer: usize, layers: usize },
    #[error("via diameter {diameter} mm is below the fillable minimum {minimum} mm")]
    DiameterBelowMinimum { diameter: f64, minimum: f64 },
    #[error("pad {reference}.{number} lies outside the board outline")]
    PadOutsideBoard { reference: String, number: String },
    #[error("{violations} design rule violation(s); resolve them or assemble with force")]
    DrcNotClean { violations: usize },
    #[error(transparent)]
    Socket(#[from] SocketError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geom(#[from] geom::GeomError),
    #[error(transparent)]
    Process(#[from] crate::process::ProcessError),
}

/// Hollow channel solid for one routed trace: a box the length of the
/// segment plus a joint cylinder at each end so connected segments meet
/// in smooth round junctions.
pub fn trace_solid(seg: &Segment, stackup: &Stackup) -> Result<Solid, SynthError> {
    if seg.layer >= stackup.copper_layers {
        return Err(SynthError::LayerOutOfRange {
            layer: seg.layer,
            layers: stackup.copper_layers,
        });
    }
    let (z0, z1) = stackup.layer_z_range(seg.layer);
    let h = z1 - z0;
    let dir = seg.end - seg.start;
    let yaw = dir.y.atan2(dir.x).to_degrees();
    let mid = nalgebra::center(&seg.start, &seg.end);
    let body = Solid::box_z(
        Point3::new(mid.x, mid.y, (z0 + z1) / 2.0),
        Vector3::new(dir.norm() / 2.0, seg.width / 2.0, h / 2.0),
        yaw,
    );
    let joint = |p: Point2<f64>| Solid::cylinder_z(Point3::new(p.x, p.y, z0), seg.width / 2.0, h);
    Ok(Solid::union_of(vec![
        body,
        joint(seg.start),
        joint(seg.end),
    ]))
}

/// Via channel: a cylinder from the bottom of its lowest layer's traces
/// to the top of its highest layer's traces.
pub fn via_solid(via: &Via, stackup: &Stackup) -> Result<Solid, SynthError> {
    if via.layer_to >= stackup.copper_layers || via.layer_from > via.layer_to {
        return Err(SynthError::LayerOutOfRange {
            layer: via.layer_to,
            layers: stackup.copper_layers,
        });
    }
    if via.diameter < VIA_DIAMETER_FLOOR {
        return Err(SynthError::DiameterBelowMinimum {
            diameter: via.diameter,
            minimum: VIA_DIAMETER_FLOOR,
        });
    }
    let z0 = stackup.layer_z_range(via.layer_from).0;
    let z1 = stackup.layer_z_range(via.layer_to).1;
    Ok(Solid::cylinder_z(
        Point3::new(via.at.x, via.at.y, z0),
        via.diameter / 2.0,
        z1 - z0,
    ))
}

/// Pad opening: a thin cuboid spanning the outer insulation layer so the
/// channel network reaches the board face. Through-hole pads return the
/// empty solid; their socket pin cavity is the opening instead.
pub fn pad_solid(pad: &Pad, owner: &Footprint, stackup: &Stackup) -> Solid {
    if pad.kind == PadKind::ThruHole {
        return Solid::Empty;
    }
    let (center, yaw) = owner.pad_placement(pad);
    let t = stackup.insulation_z;
    let (z0, z1) = match pad.side {
        Side::Top => (stackup.board_height - t, stackup.board_height),
        Side::Bottom => (0.0, t),
    };
    Solid::box_z(
        Point3::new(center.x, center.y, (z0 + z1) / 2.0),
        Vector3::new(pad.size.x / 2.0, pad.size.y / 2.0, (z1 - z0) / 2.0),
        yaw,
    )
}

/// Substrate body: the sorted outline extruded from z = 0 to the board
/// height, arcs tessellated at 0.01 mm chord tolerance.
pub fn body_solid(outline: &SortedOutline, stackup: &Stackup) -> Result<Solid, SynthError> {
    let polygon = tessellate_loop(&outline.elements, 0.01)?;
    Ok(Solid::extruded_polygon(polygon, 0.0, stackup.board_height))
}

/// Flattens a sorted outline loop into a polygon, dropping each element's
/// final point since the next element starts there.
pub fn tessellate_loop(
    elements: &[OutlineElem],
    chord_tol: f64,
) -> Result<Vec<Point2<f64>>, SynthError> {
    let mut polygon = Vec::new();
    for elem in elements {
        let points = elem.tessellate(chord_tol)?;
        polygon.extend_from_slice(&points[..points.len() - 1]);
    }
    Ok(polygon)
}

/// One subtractive socket cavity, tagged with the net it opens to the
/// surface when it doubles as a filling outlet (through-hole pins).
#[derive(Debug, Clone, PartialEq)]
pub struct SocketCavity {
    pub solid: Solid,
    pub outlet_for: Option<NetId>,
}

/// Cavities for one footprint, per its package spec:
/// - two-terminal SMD: a single pocket, body length plus an end clearance
///   on both sides, sunk one body height into the face;
/// - leaded SMD: a shallow body recess plus one pocket per lead reaching
///   down to the pad layer;
/// - through-hole: one vertical bore per pin, open only on the insertion
///   face and stopping one insulation layer short of the far face.
///
/// Bottom-side footprints get the same cavities mirrored about the board
/// midplane.
pub fn socket_solids(
    fp: &Footprint,
    lib: &SocketLibrary,
    stackup: &Stackup,
) -> Result<Vec<SocketCavity>, SynthError> {
    let spec = lib.lookup_for_pads(&fp.lib_id, fp.pads.len())?;
    let height = stackup.board_height;
    let t = stackup.insulation_z;
    let [body_l, body_w, body_h] = spec.body;

    let z_span = |depth: f64| match fp.side {
        Side::Top => (height - depth, height),
        Side::Bottom => (0.0, depth),
    };
    let face_box = |center: Point2<f64>, half_l: f64, half_w: f64, depth: f64, yaw: f64| {
        let (z0, z1) = z_span(depth);
        Solid::box_z(
            Point3::new(center.x, center.y, (z0 + z1) / 2.0),
            Vector3::new(half_l, half_w, (z1 - z0) / 2.0),
            yaw,
        )
    };

    let mut out = Vec::new();
    match spec.kind {
        SocketKind::TwoTerminalSmd => {
            out.push(SocketCavity {
                solid: face_box(
                    fp.at,
                    body_l / 2.0 + spec.end_clearance,
                    body_w / 2.0,
                    body_h,
                    fp.rot_deg,
                ),
                outlet_for: None,
            });
        }
        SocketKind::LeadedSmd => {
            let depth = spec.body_recess_depth.expect("validated on load");
            out.push(SocketCavity {
                solid: face_box(fp.at, body_l / 2.0, body_w / 2.0, depth, fp.rot_deg),
                outlet_for: None,
            });
            let [pocket_l, pocket_w] = spec.pin_pocket.expect("validated on load");
            for pad in &fp.pads {
                let (center, yaw) = fp.pad_placement(pad);
                out.push(SocketCavity {
                    solid: face_box(center, pocket_l / 2.0, pocket_w / 2.0, t, yaw),
                    outlet_for: None,
                });
            }
        }
        SocketKind::Tht => {
            let bore = spec.pin_cavity_diameter.expect("validated on load");
            let (z0, z1) = if spec.insertion_side_only {
                match fp.side {
                    Side::Top => (t, height),
                    Side::Bottom => (0.0, height - t),
                }
            } else {
                (0.0, height)
            };
            for pad in &fp.pads {
                let (center, _) = fp.pad_placement(pad);
                out.push(SocketCavity {
                    solid: Solid::cylinder_z(
                        Point3::new(center.x, center.y, z0),
                        bore / 2.0,
                        z1 - z0,
                    ),
                    outlet_for: pad.net,
                });
            }
        }
    }
    Ok(out)
}

/// Channel network of one net with its filling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct NetChannel {
    pub net: NetId,
    pub name: String,
    /// Trace boxes, joints, via barrels, and pad cuboids, in input order.
    pub solids: Vec<Solid>,
    /// Union of `solids`.
    pub union: Solid,
    pub volume: VolumeEstimate,
    /// Surface openings confirmed to meet this net's channels: pad
    /// cuboids plus through-hole pin cavities.
    pub outlet_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChannelSet {
    pub nets: BTreeMap<NetId, NetChannel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    /// Final printable solid: body minus channels minus cavities.
    pub board: Solid,
    /// The plain extruded body before subtraction.
    pub body: Solid,
    pub channels: ChannelSet,
    pub cavities: Vec<SocketCavity>,
    pub stackup: Stackup,
    /// Tessellated outer outline, counterclockwise.
    pub outline_polygon: Vec<Point2<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AssembleOptions {
    /// Grid pitch for per-net and conservation volume estimates.
    pub volume_pitch: f64,
    /// Assemble even when the design rule check reports violations.
    pub force: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions {
            volume_pitch: 0.05,
            force: false,
        }
    }
}

/// Runs the whole synthesis: design rule gate, stackup, body, per-net
/// channels, sockets, outlet verification, and the global boolean.
pub fn assemble(
    design: &PcbDesign,
    params: &ProcessParams,
    lib: &SocketLibrary,
    opts: &AssembleOptions,
) -> Result<Assembly, SynthError> {
    let mut warnings = Vec::new();

    let violations = run_drc(design, params);
    if !violations.is_empty() {
        if !opts.force {
            return Err(SynthError::DrcNotClean {
                violations: violations.len(),
            });
        }
        warnings.push(format!(
            "assembled with {} unresolved design rule violation(s)",
            violations.len()
        ));
    }

    let stackup = Stackup::new(design.copper_layer_count, params)?;
    let sorted = sort_outline(&design.outline, 1e-3)?;
    for _ in &sorted.rejected_loops {
        warnings.push("outline contains an extra closed loop; cutouts are ignored".to_string());
    }
    let outline_polygon = tessellate_loop(&sorted.elements, 0.01)?;
    let body = Solid::extruded_polygon(outline_polygon.clone(), 0.0, stackup.board_height);

    let mut per_net: BTreeMap<NetId, Vec<Solid>> = BTreeMap::new();
    for seg in &design.segments {
        per_net
            .entry(seg.net)
            .or_default()
            .push(trace_solid(seg, &stackup)?);
    }
    for via in &design.vias {
        per_net
            .entry(via.net)
            .or_default()
            .push(via_solid(via, &stackup)?);
    }

    let mut pad_outlets: BTreeMap<NetId, Vec<Solid>> = BTreeMap::new();
    let mut cavities: Vec<SocketCavity> = Vec::new();
    for fp in &design.footprints {
        for pad in &fp.pads {
            let (center, _) = fp.pad_placement(pad);
            if !geom::polygon_contains(&outline_polygon, center) {
                return Err(SynthError::PadOutsideBoard {
                    reference: fp.reference.clone(),
                    number: pad.number.clone(),
                });
            }
            let solid = pad_solid(pad, fp, &stackup);
            if solid == Solid::Empty {
                continue;
            }
            if let Some(net) = pad.net {
                per_net.entry(net).or_default().push(solid.clone());
                pad_outlets.entry(net).or_default().push(solid);
            }
        }
        if fp.pads.is_empty() {
            warnings.push(format!(
                "footprint {} has no pads; no socket cavity generated",
                fp.reference
            ));
            continue;
        }
        cavities.extend(socket_solids(fp, lib, &stackup)?);
    }

    let mut nets = BTreeMap::new();
    for (net, solids) in per_net {
        let union = Solid::union_of(solids.clone());
        let volume = geom::volume(&union, opts.volume_pitch)?;
        let name = design
            .nets
            .get(&net)
            .cloned()
            .unwrap_or_else(|| format!("net-{net}"));

        let mut outlet_count = 0;
        for outlet in pad_outlets.get(&net).into_iter().flatten() {
            if solids_intersect(outlet, &union) {
                outlet_count += 1;
            }
        }
        for cavity in cavities.iter().filter(|c| c.outlet_for == Some(net)) {
            if solids_intersect(&cavity.solid, &union) {
                outlet_count += 1;
            }
        }
        if outlet_count == 0 {
            warnings.push(format!(
                "net {name} has no surface outlet; its channels cannot be filled"
            ));
        }
        nets.insert(
            net,
            NetChannel {
                net,
                name,
                solids,
                union,
                volume,
                outlet_count,
            },
        );
    }

    let mut cuts: Vec<Solid> = nets.values().map(|c| c.union.clone()).collect();
    cuts.extend(cavities.iter().map(|c| c.solid.clone()));
    let board = Solid::difference(body.clone(), cuts);

    Ok(Assembly {
        board,
        body,
        channels: ChannelSet { nets },
        cavities,
        stackup,
        outline_polygon,
        warnings,
    })
}

/// Sampling intersection test over the shared bounding region, boundary
/// planes included so face-on-face contact (a pad sitting exactly on a
/// trace top) is detected. The synthesized overlaps are full-thickness,
/// never slivers, so a coarse lattice suffices.
fn solids_intersect(a: &Solid, b: &Solid) -> bool {
    let overlap = a.bbox().intersection(&b.bbox());
    if overlap.is_empty() {
        return false;
    }
    let n = 4;
    let at = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / n as f64;
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                let p = Point3::new(
                    at(overlap.min.x, overlap.max.x, i),
                    at(overlap.min.y, overlap.max.y, j),
                    at(overlap.min.z, overlap.max.z, k),
                );
                if a.contains(p) && b.contains(p) {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcb_model::Pad;
    use approx::assert_relative_eq;
    use nalgebra::Vector2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn stackup(layers: usize) -> Stackup {
        Stackup::new(layers, &ProcessParams::default()).unwrap()
    }

    #[test]
    fn trace_solid_matches_reference_volume() {
        // One layer: z in [0.3, 1.0]. A 30 mm straight 0.7 channel is
        // 30*0.7*0.7 plus one full joint cylinder's worth of overhang.
        let s = stackup(1);
        let seg = Segment {
            start: pt(0.0, 0.0),
            end: pt(30.0, 0.0),
            width: 0.7,
            layer: 0,
            net: 1,
        };
        let solid = trace_solid(&seg, &s).unwrap();
        let b = solid.bbox();
        assert_relative_eq!(b.min.z, 0.3);
        assert_relative_eq!(b.max.z, 1.0);
        assert_relative_eq!(b.min.x, -0.35);
        assert_relative_eq!(b.max.x, 30.35);

        let expected = 30.0 * 0.7 * 0.7 + std::f64::consts::PI * 0.35 * 0.35 * 0.7;
        let measured = geom::volume(&solid, 0.02).unwrap();
        assert!(
            (measured.value - expected).abs() < 0.05,
            "measured {} vs expected {expected}",
            measured.value
        );
    }

    #[test]
    fn diagonal_trace_is_oriented_along_its_bearing() {
        let s = stackup(2);
        let seg = Segment {
            start: pt(0.0, 0.0),
            end: pt(10.0, 10.0),
            width: 0.7,
            layer: 1,
            net: 1,
        };
        let solid = trace_solid(&seg, &s).unwrap();
        let (z0, z1) = s.layer_z_range(1);
        let zc = (z0 + z1) / 2.0;
        assert!(solid.contains(Point3::new(5.0, 5.0, zc)));
        assert!(solid.contains(Point3::new(5.2, 4.8, zc)));
        // Perpendicular offset past the half-width is outside.
        assert!(!solid.contains(Point3::new(5.4, 4.6, zc)));
    }

    #[test]
    fn trace_on_missing_layer_is_rejected() {
        let s = stackup(2);
        let seg = Segment {
            start: pt(0.0, 0.0),
            end: pt(1.0, 0.0),
            width: 0.7,
            layer: 3,
            net: 1,
        };
        match trace_solid(&seg, &s) {
            Err(SynthError::LayerOutOfRange { layer: 3, layers: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    fn via(d: f64) -> Via {
        Via {
            at: pt(4.0, 5.0),
            diameter: d,
            drill: 0.6,
            layer_from: 0,
            layer_to: 1,
            net: 1,
        }
    }

    #[test]
    fn via_spans_bottom_traces_to_top_traces() {
        let solid = via_solid(&via(1.2), &stackup(2)).unwrap();
        let b = solid.bbox();
        assert_relative_eq!(b.min.z, 0.3);
        assert_relative_eq!(b.max.z, 2.0);
        assert_relative_eq!(b.max.x - b.min.x, 1.2);

        // Thinner insulation shifts the whole stack down.
        let mut params = ProcessParams::default();
        params.insulation_z = 0.18;
        let s = Stackup::new(2, &params).unwrap();
        let b = via_solid(&via(1.2), &s).unwrap().bbox();
        assert_relative_eq!(b.min.z, 0.18);
        assert_relative_eq!(b.max.z, 1.76);
    }

    #[test]
    fn undersized_via_is_rejected() {
        match via_solid(&via(1.0), &stackup(2)) {
            Err(SynthError::DiameterBelowMinimum { diameter, minimum }) => {
                assert_relative_eq!(diameter, 1.0);
                assert_relative_eq!(minimum, 1.2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    fn smd_pad(number: &str, x: f64, net: Option<NetId>) -> Pad {
        Pad {
            number: number.into(),
            at_rel: pt(x, 0.0),
            rot_deg: 0.0,
            size: Vector2::new(1.0, 1.25),
            drill: None,
            kind: PadKind::Smd,
            side: Side::Top,
            net,
        }
    }

    fn chip_footprint(reference: &str, at: Point2<f64>, rot: f64, nets: [NetId; 2]) -> Footprint {
        Footprint {
            reference: reference.into(),
            lib_id: "Test:R0805".into(),
            at,
            rot_deg: rot,
            side: Side::Top,
            pads: vec![
                smd_pad("1", -0.95, Some(nets[0])),
                smd_pad("2", 0.95, Some(nets[1])),
            ],
        }
    }

    #[test]
    fn pad_opens_the_outer_insulation_layer() {
        let s = stackup(2);
        let fp = chip_footprint("R1", pt(10.0, -5.0), 90.0, [1, 2]);
        let mut pad = smd_pad("1", 1.0, Some(1));
        pad.size = Vector2::new(0.7, 0.7);
        let solid = pad_solid(&pad, &fp, &s);
        let b = solid.bbox();
        // Rotated 90 degrees: offset (1,0) lands at (10,-4).
        assert_relative_eq!((b.min.x + b.max.x) / 2.0, 10.0, epsilon = 1e-12);
        assert_relative_eq!((b.min.y + b.max.y) / 2.0, -4.0, epsilon = 1e-12);
        assert_relative_eq!(b.min.z, 2.0);
        assert_relative_eq!(b.max.z, 2.3);
    }

    #[test]
    fn bottom_pad_opens_the_bottom_face() {
        let s = stackup(2);
        let mut fp = chip_footprint("R1", pt(0.0, 0.0), 0.0, [1, 2]);
        fp.side = Side::Bottom;
        let mut pad = fp.pads[0].clone();
        pad.side = Side::Bottom;
        let b = pad_solid(&pad, &fp, &s).bbox();
        assert_relative_eq!(b.min.z, 0.0);
        assert_relative_eq!(b.max.z, 0.3);
    }

    #[test]
    fn through_hole_pad_emits_no_cuboid() {
        let s = stackup(2);
        let fp = chip_footprint("J1", pt(0.0, 0.0), 0.0, [1, 2]);
        let mut pad = fp.pads[0].clone();
        pad.kind = PadKind::ThruHole;
        pad.drill = Some(0.8);
        assert_eq!(pad_solid(&pad, &fp, &s), Solid::Empty);
    }

    fn rect_elems(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<OutlineElem> {
        vec![
            OutlineElem::Line {
                start: pt(x0, y0),
                end: pt(x1, y0),
            },
            OutlineElem::Line {
                start: pt(x1, y0),
                end: pt(x1, y1),
            },
            OutlineElem::Line {
                start: pt(x1, y1),
                end: pt(x0, y1),
            },
            OutlineElem::Line {
                start: pt(x0, y1),
                end: pt(x0, y0),
            },
        ]
    }

    #[test]
    fn body_is_the_outline_extruded_to_stack_height() {
        let s = stackup(2);
        let sorted = sort_outline(&rect_elems(0.0, 0.0, 50.0, 30.0), 1e-3).unwrap();
        let body = body_solid(&sorted, &s).unwrap();
        let b = body.bbox();
        assert_relative_eq!(b.max.z, 2.3);
        // Analytic prism volume; the polygon is exact for straight edges.
        let poly = tessellate_loop(&sorted.elements, 0.01).unwrap();
        let area = geom::polygon_signed_area(&poly);
        assert_relative_eq!(area * 2.3, 3450.0, epsilon = 1e-9);

        let measured = geom::volume(&body, 0.1).unwrap();
        assert!((measured.value - 3450.0).abs() <= measured.error_bound.max(1.0));
    }

    #[test]
    fn arc_cornered_body_loses_the_corner_volume() {
        let s = stackup(2);
        // 20 x 10 rectangle with one rounded corner, radius 2.
        let elems = vec![
            OutlineElem::Line {
                start: pt(0.0, 0.0),
                end: pt(18.0, 0.0),
            },
            OutlineElem::Arc {
                start: pt(18.0, 0.0),
                mid: pt(
                    18.0 + 2.0 * std::f64::consts::FRAC_1_SQRT_2,
                    2.0 - 2.0 * std::f64::consts::FRAC_1_SQRT_2,
                ),
                end: pt(20.0, 2.0),
            },
            OutlineElem::Line {
                start: pt(20.0, 2.0),
                end: pt(20.0, 10.0),
            },
            OutlineElem::Line {
                start: pt(20.0, 10.0),
                end: pt(0.0, 10.0),
            },
            OutlineElem::Line {
                start: pt(0.0, 10.0),
                end: pt(0.0, 0.0),
            },
        ];
        let sorted = sort_outline(&elems, 1e-3).unwrap();
        let body = body_solid(&sorted, &s).unwrap();
        let corner_loss = (4.0 - std::f64::consts::PI) * 2.3;
        let expected = 200.0 * 2.3 - corner_loss;
        let measured = geom::volume(&body, 0.05).unwrap();
        assert!(
            (measured.value - expected).abs() < 0.5,
            "measured {} vs expected {expected}",
            measured.value
        );
        assert!(measured.value < 200.0 * 2.3);
    }

    #[test]
    fn chip_socket_is_a_single_pocket_with_end_clearance() {
        let s = stackup(2);
        let lib = SocketLibrary::bundled();
        let fp = chip_footprint("R1", pt(10.0, 10.0), 0.0, [1, 2]);
        let cavities = socket_solids(&fp, &lib, &s).unwrap();
        assert_eq!(cavities.len(), 1);
        let b = cavities[0].solid.bbox();
        // 2.0 body + 0.2 clearance each end; depth = body height 0.5.
        assert_relative_eq!(b.max.x - b.min.x, 2.4, epsilon = 1e-12);
        assert_relative_eq!(b.max.y - b.min.y, 1.25, epsilon = 1e-12);
        assert_relative_eq!(b.min.z, 1.8);
        assert_relative_eq!(b.max.z, 2.3);
        assert_eq!(cavities[0].outlet_for, None);
    }

    #[test]
    fn bottom_side_socket_is_mirrored_to_the_bottom_face() {
        let s = stackup(2);
        let lib = SocketLibrary::bundled();
        let mut fp = chip_footprint("R1", pt(10.0, 10.0), 0.0, [1, 2]);
        fp.side = Side::Bottom;
        let b = socket_solids(&fp, &lib, &s).unwrap()[0].solid.bbox();
        assert_relative_eq!(b.min.z, 0.0);
        assert_relative_eq!(b.max.z, 0.5);
    }

    fn soic8(at: Point2<f64>) -> Footprint {
        let pad = |number: usize, x: f64, y: f64| Pad {
            number: number.to_string(),
            at_rel: pt(x, y),
            rot_deg: 0.0,
            size: Vector2::new(1.5, 0.6),
            drill: None,
            kind: PadKind::Smd,
            side: Side::Top,
            net: Some(number as NetId),
        };
        let mut pads = Vec::new();
        for i in 0..4 {
            let y = 1.905 - i as f64 * 1.27;
            pads.push(pad(i + 1, -2.7, y));
            pads.push(pad(8 - i, 2.7, y));
        }
        Footprint {
            reference: "U1".into(),
            lib_id: "Package_SO:SOIC-8_3.9x4.9mm_P1.27mm".into(),
            at,
            rot_deg: 0.0,
            side: Side::Top,
            pads,
        }
    }

    #[test]
    fn leaded_socket_has_recess_plus_pin_pockets() {
        let s = stackup(2);
        let lib = SocketLibrary::bundled();
        let cavities = socket_solids(&soic8(pt(0.0, 0.0)), &lib, &s).unwrap();
        assert_eq!(cavities.len(), 9);
        let recess = cavities[0].solid.bbox();
        assert_relative_eq!(recess.min.z, 1.8);
        assert_relative_eq!(recess.max.z, 2.3);
        for pocket in &cavities[1..] {
            let b = pocket.solid.bbox();
            // Pockets reach the pad layer through the outer insulation.
            assert_relative_eq!(b.min.z, 2.0);
            assert_relative_eq!(b.max.z, 2.3);
        }
    }

    fn dip8(at: Point2<f64>, side: Side) -> Footprint {
        let pad = |number: usize, x: f64, y: f64| Pad {
            number: number.to_string(),
            at_rel: pt(x, y),
            rot_deg: 0.0,
            size: Vector2::new(1.6, 1.6),
            drill: Some(0.8),
            kind: PadKind::ThruHole,
            side: Side::Top,
            net: Some(number as NetId),
        };
        let mut pads = Vec::new();
        for i in 0..4 {
            let y = 3.81 - i as f64 * 2.54;
            pads.push(pad(i + 1, -3.81, y));
            pads.push(pad(8 - i, 3.81, y));
        }
        Footprint {
            reference: "U2".into(),
            lib_id: "Package_DIP:DIP-8_W7.62mm".into(),
            at,
            rot_deg: 0.0,
            side,
            pads,
        }
    }

    #[test]
    fn through_hole_cavity_opens_on_the_insertion_side_only() {
        let s = stackup(2);
        let lib = SocketLibrary::bundled();
        let top = socket_solids(&dip8(pt(0.0, 0.0), Side::Top), &lib, &s).unwrap();
        assert_eq!(top.len(), 8);
        for cavity in &top {
            let b = cavity.solid.bbox();
            // Stops one insulation layer short of the bottom face.
            assert_relative_eq!(b.min.z, 0.3);
            assert_relative_eq!(b.max.z, 2.3);
            assert_relative_eq!(b.max.x - b.min.x, 1.0, epsilon = 1e-12);
            assert!(cavity.outlet_for.is_some());
        }

        let bottom = socket_solids(&dip8(pt(0.0, 0.0), Side::Bottom), &lib, &s).unwrap();
        for cavity in &bottom {
            let b = cavity.solid.bbox();
            assert_relative_eq!(b.min.z, 0.0);
            assert_relative_eq!(b.max.z, 2.0);
        }
    }

    /// Two-net demo: a chip resistor bridging VCC and SIG, SIG continuing
    /// through a via to the bottom layer.
    fn demo_design() -> PcbDesign {
        let mut nets = BTreeMap::new();
        nets.insert(1, "VCC".to_string());
        nets.insert(2, "SIG".to_string());
        let seg = |x0: f64, y0: f64, x1: f64, y1: f64, layer: usize, net: NetId| Segment {
            start: pt(x0, y0),
            end: pt(x1, y1),
            width: 0.7,
            layer,
            net,
        };
        PcbDesign {
            nets,
            segments: vec![
                seg(5.0, 10.0, 9.05, 10.0, 1, 1),
                seg(10.95, 10.0, 20.0, 10.0, 1, 2),
                seg(20.0, 10.0, 25.0, 10.0, 0, 2),
            ],
            vias: vec![Via {
                at: pt(20.0, 10.0),
                diameter: 1.2,
                drill: 0.6,
                layer_from: 0,
                layer_to: 1,
                net: 2,
            }],
            footprints: vec![chip_footprint("R1", pt(10.0, 10.0), 0.0, [1, 2])],
            outline: rect_elems(0.0, 0.0, 30.0, 20.0),
            copper_layer_count: 2,
            warnings: Vec::new(),
        }
    }

    #[test]
    fn assemble_builds_channels_for_each_net() {
        let design = demo_design();
        let lib = SocketLibrary::bundled();
        let params = ProcessParams::default();
        let asm = assemble(&design, &params, &lib, &AssembleOptions::default()).unwrap();

        assert_eq!(asm.channels.nets.len(), 2);
        let vcc = &asm.channels.nets[&1];
        let sig = &asm.channels.nets[&2];
        assert_eq!(vcc.name, "VCC");
        // VCC: one trace + one pad.
        assert_eq!(vcc.solids.len(), 2);
        // SIG: two traces + via + pad.
        assert_eq!(sig.solids.len(), 4);
        assert_eq!(vcc.outlet_count, 1);
        assert_eq!(sig.outlet_count, 1);
        assert!(vcc.volume.value > 0.0);

        let b = asm.board.bbox();
        assert_relative_eq!(b.max.z - b.min.z, 2.3);
        assert!(asm.warnings.is_empty(), "{:?}", asm.warnings);
    }

    #[test]
    fn channels_are_hollow_and_walls_are_solid() {
        let design = demo_design();
        let lib = SocketLibrary::bundled();
        let params = ProcessParams::default();
        let asm = assemble(&design, &params, &lib, &AssembleOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);

        for channel in asm.channels.nets.values() {
            let b = channel.union.bbox();
            let mut inside = 0;
            let mut tries = 0;
            while inside < 1000 && tries < 200_000 {
                tries += 1;
                let p = Point3::new(
                    rng.gen_range(b.min.x..b.max.x),
                    rng.gen_range(b.min.y..b.max.y),
                    rng.gen_range(b.min.z..b.max.z),
                );
                if channel.union.contains(p) {
                    inside += 1;
                    assert!(!asm.board.contains(p), "channel point {p} still solid");
                }
            }
            assert_eq!(inside, 1000, "could not sample enough channel points");
        }

        // Points at least a wall away from every channel and cavity, on a
        // trace layer inside the outline, must remain solid.
        let (z0, z1) = asm.stackup.layer_z_range(1);
        let z = (z0 + z1) / 2.0;
        let body_bb = asm.body.bbox();
        let mut kept = 0;
        let mut tries = 0;
        while kept < 1000 && tries < 200_000 {
            tries += 1;
            let p = Point3::new(
                rng.gen_range(body_bb.min.x..body_bb.max.x),
                rng.gen_range(body_bb.min.y..body_bb.max.y),
                z,
            );
            if geom::polygon_sdf(&asm.outline_polygon, p.xy()) > -0.05 {
                continue;
            }
            let clear_of_channels = asm
                .channels
                .nets
                .values()
                .flat_map(|c| &c.solids)
                .all(|s| s.sdf(p) >= params.wall_xy_min);
            let clear_of_cavities = asm.cavities.iter().all(|c| c.solid.sdf(p) > 0.05);
            if clear_of_channels && clear_of_cavities {
                kept += 1;
                assert!(asm.board.contains(p), "wall point {p} was carved away");
            }
        }
        assert_eq!(kept, 1000, "could not sample enough wall points");
    }

    #[test]
    fn volume_is_conserved_by_the_global_boolean() {
        let design = demo_design();
        let lib = SocketLibrary::bundled();
        let params = ProcessParams::default();
        let opts = AssembleOptions {
            volume_pitch: 0.05,
            force: false,
        };
        let asm = assemble(&design, &params, &lib, &opts).unwrap();

        let pitch = 0.05;
        let body = geom::volume(&asm.body, pitch).unwrap();
        let board = geom::volume(&asm.board, pitch).unwrap();
        let mut cuts: Vec<Solid> = asm
            .channels
            .nets
            .values()
            .map(|c| c.union.clone())
            .collect();
        cuts.extend(asm.cavities.iter().map(|c| c.solid.clone()));
        let removed = geom::volume(&Solid::union_of(cuts), pitch).unwrap();

        let gap = (board.value + removed.value - body.value).abs();
        assert!(
            gap <= board.error_bound + removed.error_bound + body.error_bound,
            "gap {gap} exceeds summed bounds"
        );
        // Body and board share one grid, so their difference measures the
        // removed material directly; it must agree closely.
        let removed_via_difference = body.value - board.value;
        assert!(
            (removed_via_difference - removed.value).abs() <= 0.05 * removed.value,
            "difference {removed_via_difference} vs direct {}",
            removed.value
        );
    }

    #[test]
    fn assemble_is_deterministic() {
        let design = demo_design();
        let lib = SocketLibrary::bundled();
        let params = ProcessParams::default();
        let a = assemble(&design, &params, &lib, &AssembleOptions::default()).unwrap();
        let b = assemble(&design, &params, &lib, &AssembleOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_board_is_a_plain_prism() {
        let design = PcbDesign {
            nets: BTreeMap::new(),
            segments: vec![],
            vias: vec![],
            footprints: vec![],
            outline: rect_elems(0.0, 0.0, 30.0, 20.0),
            copper_layer_count: 2,
            warnings: Vec::new(),
        };
        let lib = SocketLibrary::bundled();
        let asm = assemble(
            &design,
            &ProcessParams::default(),
            &lib,
            &AssembleOptions::default(),
        )
        .unwrap();
        assert!(asm.channels.nets.is_empty());
        assert_eq!(asm.board, asm.body);
    }

    #[test]
    fn drc_violations_block_assembly_unless_forced() {
        let mut design = demo_design();
        design.segments[0].width = 0.5;
        let lib = SocketLibrary::bundled();
        let params = ProcessParams::default();

        match assemble(&design, &params, &lib, &AssembleOptions::default()) {
            Err(SynthError::DrcNotClean { violations: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }

        let forced = AssembleOptions {
            force: true,
            ..AssembleOptions::default()
        };
        let asm = assemble(&design, &params, &lib, &forced).unwrap();
        assert!(asm.warnings.iter().any(|w| w.contains("design rule")));
    }

    #[test]
    fn net_without_any_pad_gets_an_outlet_warning() {
        let mut design = demo_design();
        design.nets.insert(3, "FLOAT".to_string());
        design.segments.push(Segment {
            start: pt(5.0, 15.0),
            end: pt(25.0, 15.0),
            width: 0.7,
            layer: 1,
            net: 3,
        });
        let lib = SocketLibrary::bundled();
        let asm = assemble(
            &design,
            &ProcessParams::default(),
            &lib,
            &AssembleOptions::default(),
        )
        .unwrap();
        assert_eq!(asm.channels.nets[&3].outlet_count, 0);
        assert!(asm
            .warnings
            .iter()
            .any(|w| w.contains("FLOAT") && w.contains("outlet")));
    }

    #[test]
    fn through_hole_pin_cavity_counts_as_an_outlet() {
        let mut design = demo_design();
        // Wire net 1 to pin 1 of a DIP at (and ending at) the pin site.
        let dip = dip8(pt(15.0, 14.0), Side::Top);
        let pin1 = dip.pad_placement(&dip.pads[0]).0;
        design.segments.push(Segment {
            start: pt(5.0, 10.0),
            end: pin1,
            width: 0.7,
            layer: 1,
            net: 1,
        });
        let mut dip = dip;
        for pad in &mut dip.pads {
            pad.net = Some(1);
        }
        design.footprints.push(dip);
        let lib = SocketLibrary::bundled();
        let asm = assemble(
            &design,
            &ProcessParams::default(),
            &lib,
            &AssembleOptions::default(),
        )
        .unwrap();
        // Pad outlet plus the reached pin cavity.
        assert_eq!(asm.channels.nets[&1].outlet_count, 2);
    }

    #[test]
    fn pad_outside_the_outline_is_rejected() {
        let mut design = demo_design();
        design.footprints[0].at = pt(30.5, 10.0);
        let lib = SocketLibrary::bundled();
        match assemble(
            &design,
            &ProcessParams::default(),
            &lib,
            &AssembleOptions::default(),
        ) {
            Err(SynthError::PadOutsideBoard { reference, .. }) => assert_eq!(reference, "R1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_footprint_package_is_rejected() {
        let mut design = demo_design();
        design.footprints[0].lib_id = "Mystery:XYZ-UNKNOWN".into();
        let lib = SocketLibrary::bundled();
        match assemble(
            &design,
            &ProcessParams::default(),
            &lib,
            &AssembleOptions::default(),
        ) {
            Err(SynthError::Socket(SocketError::UnknownPackage(id))) => {
                assert_eq!(id, "Mystery:XYZ-UNKNOWN");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
