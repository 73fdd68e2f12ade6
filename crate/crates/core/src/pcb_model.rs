//! Typed board model extracted from a parsed `.kicad_pcb` tree.
//!
//! Coordinates are converted to a right-handed, Y-up frame at extraction
//! time: KiCad stores Y pointing down, so every Y coordinate is negated
//! here, once, and nothing downstream has to think about it again. With
//! that flip, KiCad rotation angles become ordinary counterclockwise
//! rotations, so `rot_deg` fields need no sign adjustment.
//!
//! Copper layers are numbered bottom-up: `B.Cu` is layer 0 and `F.Cu` is
//! layer `copper_layer_count - 1`, with `In1.Cu`, `In2.Cu`, ... counting
//! down from the top. That matches the print orientation, where layer 0 is
//! printed first.

use crate::sexpr::SExpr;
use nalgebra::{Point2, Vector2};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("board has no closed outline on Edge.Cuts")]
    MissingOutline,
    #[error("unknown copper layer {name:?} at line {line}")]
    UnknownLayer { name: String, line: usize },
    #[error("malformed {context} form at line {line}")]
    MalformedForm { context: &'static str, line: usize },
    #[error("arc trace segments on copper layers are not supported (line {line})")]
    ArcTracesUnsupported { line: usize },
    #[error("outline does not close: dangling endpoint at ({x:.4}, {y:.4})")]
    OpenOutline { x: f64, y: f64 },
    #[error("arc points at ({x0}, {y0}), ({x1}, {y1}), ({x2}, {y2}) are collinear")]
    CollinearArc {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
    },
}

pub type NetId = i64;

#[derive(Debug, Clone, PartialEq)]
pub struct PcbDesign {
    /// Net id to net name. Net 0 is KiCad's "no net" and is never stored.
    pub nets: BTreeMap<NetId, String>,
    pub segments: Vec<Segment>,
    pub vias: Vec<Via>,
    pub footprints: Vec<Footprint>,
    /// Edge.Cuts elements in file order; see [`sort_outline`].
    pub outline: Vec<OutlineElem>,
    pub copper_layer_count: usize,
    /// Non-fatal oddities found during extraction, already formatted.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: Point2<f64>,
    pub end: Point2<f64>,
    pub width: f64,
    pub layer: usize,
    pub net: NetId,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Via {
    pub at: Point2<f64>,
    pub diameter: f64,
    pub drill: f64,
    /// Lowest copper layer the via touches (inclusive).
    pub layer_from: usize,
    /// Highest copper layer the via touches (inclusive).
    pub layer_to: usize,
    pub net: NetId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PadKind {
    Smd,
    ThruHole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pad {
    pub number: String,
    /// Offset from the footprint anchor, in the footprint's own frame.
    pub at_rel: Point2<f64>,
    /// Rotation relative to the footprint. KiCad stores the absolute
    /// angle on each pad; extraction subtracts the footprint angle back out.
    pub rot_deg: f64,
    pub size: Vector2<f64>,
    pub drill: Option<f64>,
    pub kind: PadKind,
    pub side: Side,
    pub net: Option<NetId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub reference: String,
    pub lib_id: String,
    pub at: Point2<f64>,
    pub rot_deg: f64,
    pub side: Side,
    pub pads: Vec<Pad>,
}

impl Footprint {
    /// Board-space pad center and absolute yaw.
    ///
    /// Bottom-side placement mirrors the local Y axis before rotating and
    /// reverses the rotation sense, matching how KiCad flips a footprint
    /// to the back.
    pub fn pad_placement(&self, pad: &Pad) -> (Point2<f64>, f64) {
        let local = match self.side {
            Side::Top => pad.at_rel,
            Side::Bottom => Point2::new(pad.at_rel.x, -pad.at_rel.y),
        };
        let theta = self.rot_deg.to_radians();
        let (sin, cos) = theta.sin_cos();
        let offset = Vector2::new(
            local.x * cos - local.y * sin,
            local.x * sin + local.y * cos,
        );
        let yaw = match self.side {
            Side::Top => self.rot_deg + pad.rot_deg,
            Side::Bottom => self.rot_deg - pad.rot_deg,
        };
        (self.at + offset, normalize_deg(yaw))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutlineElem {
    Line {
        start: Point2<f64>,
        end: Point2<f64>,
    },
    /// Three-point arc: endpoints plus any interior point.
    Arc {
        start: Point2<f64>,
        mid: Point2<f64>,
        end: Point2<f64>,
    },
}

impl OutlineElem {
    pub fn start(&self) -> Point2<f64> {
        match self {
            OutlineElem::Line { start, .. } | OutlineElem::Arc { start, .. } => *start,
        }
    }

    pub fn end(&self) -> Point2<f64> {
        match self {
            OutlineElem::Line { end, .. } | OutlineElem::Arc { end, .. } => *end,
        }
    }

    pub fn reversed(&self) -> OutlineElem {
        match self {
            OutlineElem::Line { start, end } => OutlineElem::Line {
                start: *end,
                end: *start,
            },
            OutlineElem::Arc { start, mid, end } => OutlineElem::Arc {
                start: *end,
                mid: *mid,
                end: *start,
            },
        }
    }

    /// Polyline approximation including both endpoints exactly.
    pub fn tessellate(&self, chord_tol: f64) -> Result<Vec<Point2<f64>>, ModelError> {
        match self {
            OutlineElem::Line { start, end } => Ok(vec![*start, *end]),
            OutlineElem::Arc { start, mid, end } => arc_to_polyline(*start, *mid, *end, chord_tol),
        }
    }
}

fn normalize_deg(deg: f64) -> f64 {
    let r = deg % 360.0;
    if r < 0.0 {
        r + 360.0
    } else {
        r
    }
}

/// Maps a copper layer name to its bottom-up index.
fn copper_layer_index(name: &str, count: usize, line: usize) -> Result<usize, ModelError> {
    let unknown = || ModelError::UnknownLayer {
        name: name.to_string(),
        line,
    };
    match name {
        "B.Cu" => Ok(0),
        "F.Cu" => Ok(count - 1),
        _ => {
            let inner: usize = name
                .strip_prefix("In")
                .and_then(|s| s.strip_suffix(".Cu"))
                .and_then(|s| s.parse().ok())
                .ok_or_else(unknown)?;
            if inner == 0 || inner + 1 >= count {
                return Err(unknown());
            }
            Ok(count - 1 - inner)
        }
    }
}

fn is_copper_name(name: &str) -> bool {
    name == "F.Cu" || name == "B.Cu" || (name.starts_with("In") && name.ends_with(".Cu"))
}

/// Builds the typed design from a parsed board document.
pub fn extract_design(root: &SExpr) -> Result<PcbDesign, ModelError> {
    if !root.is_form("kicad_pcb") {
        return Err(ModelError::MalformedForm {
            context: "kicad_pcb document",
            line: root.line,
        });
    }
    let mut warnings = Vec::new();

    let copper_layer_count = count_copper_layers(root);
    let mut nets = BTreeMap::new();
    for form in root.children_named("net") {
        let id = form
            .arg(0)
            .and_then(|n| n.as_f64())
            .ok_or(ModelError::MalformedForm {
                context: "net",
                line: form.line,
            })? as NetId;
        let name = form
            .arg(1)
            .and_then(|n| n.atom_text())
            .unwrap_or("")
            .to_string();
        if id != 0 {
            nets.insert(id, name);
        }
    }

    let mut segments = Vec::new();
    for form in root.children_named("segment") {
        let start = point_of(form.child_named("start"), "segment start", form.line)?;
        let end = point_of(form.child_named("end"), "segment end", form.line)?;
        let width = float_of(form.child_named("width"), "segment width", form.line)?;
        let layer_name = str_of(form.child_named("layer"), "segment layer", form.line)?;
        let layer = copper_layer_index(&layer_name, copper_layer_count, form.line)?;
        let net = float_of(form.child_named("net"), "segment net", form.line)? as NetId;
        if (end - start).norm() < 1e-9 {
            warnings.push(format!(
                "dropped zero-length segment at ({:.4}, {:.4}) on line {}",
                start.x, start.y, form.line
            ));
            continue;
        }
        segments.push(Segment {
            start,
            end,
            width,
            layer,
            net,
        });
    }

    if let Some(arc) = root
        .children_named("arc")
        .find(|form| form.child_named("layer").is_some())
    {
        return Err(ModelError::ArcTracesUnsupported { line: arc.line });
    }

    let mut vias = Vec::new();
    for form in root.children_named("via") {
        let at = point_of(form.child_named("at"), "via at", form.line)?;
        let diameter = float_of(form.child_named("size"), "via size", form.line)?;
        let drill = float_of(form.child_named("drill"), "via drill", form.line)?;
        let net = float_of(form.child_named("net"), "via net", form.line)? as NetId;
        let layers = form.child_named("layers").ok_or(ModelError::MalformedForm {
            context: "via layers",
            line: form.line,
        })?;
        let mut span: Vec<usize> = Vec::new();
        for name in layers.as_list().unwrap_or(&[]).iter().skip(1) {
            let name = name.atom_text().unwrap_or("");
            span.push(copper_layer_index(name, copper_layer_count, form.line)?);
        }
        let (layer_from, layer_to) = match (span.iter().min(), span.iter().max()) {
            (Some(&lo), Some(&hi)) if lo < hi => (lo, hi),
            _ => {
                return Err(ModelError::MalformedForm {
                    context: "via layers",
                    line: form.line,
                })
            }
        };
        vias.push(Via {
            at,
            diameter,
            drill,
            layer_from,
            layer_to,
            net,
        });
    }

    let mut footprints = Vec::new();
    for form in root
        .as_list()
        .unwrap_or(&[])
        .iter()
        .filter(|n| n.is_form("footprint") || n.is_form("module"))
    {
        footprints.push(extract_footprint(form, &mut warnings)?);
    }

    let mut outline = Vec::new();
    for form in root.as_list().unwrap_or(&[]) {
        let head = match form.head() {
            Some(h) => h,
            None => continue,
        };
        let on_edge = form
            .child_named("layer")
            .and_then(|l| l.arg(0))
            .and_then(|n| n.atom_text())
            == Some("Edge.Cuts");
        if !on_edge {
            if head == "zone" {
                warnings.push(format!("ignored zone form on line {}", form.line));
            }
            continue;
        }
        match head {
            "gr_line" => outline.push(OutlineElem::Line {
                start: point_of(form.child_named("start"), "gr_line start", form.line)?,
                end: point_of(form.child_named("end"), "gr_line end", form.line)?,
            }),
            "gr_arc" => {
                if form.child_named("mid").is_none() {
                    return Err(ModelError::MalformedForm {
                        context: "gr_arc (legacy center/angle arcs are not supported)",
                        line: form.line,
                    });
                }
                outline.push(OutlineElem::Arc {
                    start: point_of(form.child_named("start"), "gr_arc start", form.line)?,
                    mid: point_of(form.child_named("mid"), "gr_arc mid", form.line)?,
                    end: point_of(form.child_named("end"), "gr_arc end", form.line)?,
                });
            }
            "gr_rect" => {
                let a = point_of(form.child_named("start"), "gr_rect start", form.line)?;
                let b = point_of(form.child_named("end"), "gr_rect end", form.line)?;
                let c = Point2::new(b.x, a.y);
                let d = Point2::new(a.x, b.y);
                outline.push(OutlineElem::Line { start: a, end: c });
                outline.push(OutlineElem::Line { start: c, end: b });
                outline.push(OutlineElem::Line { start: b, end: d });
                outline.push(OutlineElem::Line { start: d, end: a });
            }
            "gr_circle" => {
                let center = point_of(form.child_named("center"), "gr_circle center", form.line)?;
                let rim = point_of(form.child_named("end"), "gr_circle end", form.line)?;
                let r = (rim - center).norm();
                // A full circle becomes two half-arcs so the loop sorter
                // sees ordinary endpoint-matched elements.
                let left = Point2::new(center.x - r, center.y);
                let right = Point2::new(center.x + r, center.y);
                let top = Point2::new(center.x, center.y + r);
                let bottom = Point2::new(center.x, center.y - r);
                outline.push(OutlineElem::Arc {
                    start: right,
                    mid: top,
                    end: left,
                });
                outline.push(OutlineElem::Arc {
                    start: left,
                    mid: bottom,
                    end: right,
                });
            }
            _ => {}
        }
    }
    if outline.is_empty() {
        return Err(ModelError::MissingOutline);
    }

    Ok(PcbDesign {
        nets,
        segments,
        vias,
        footprints,
        outline,
        copper_layer_count,
        warnings,
    })
}

fn count_copper_layers(root: &SExpr) -> usize {
    if let Some(layers) = root.child_named("layers") {
        let declared = layers
            .as_list()
            .unwrap_or(&[])
            .iter()
            .skip(1)
            .filter_map(|entry| entry.arg(0).and_then(|n| n.atom_text()))
            .filter(|name| is_copper_name(name))
            .count();
        if declared > 0 {
            return declared;
        }
    }
    // No header: fall back to the layers actually referenced.
    let mut names = std::collections::BTreeSet::new();
    for form in root.as_list().unwrap_or(&[]) {
        for layer in form.children_named("layer").chain(form.children_named("layers")) {
            for item in layer.as_list().unwrap_or(&[]).iter().skip(1) {
                if let Some(name) = item.atom_text() {
                    if is_copper_name(name) {
                        names.insert(name.to_string());
                    }
                }
            }
        }
    }
    names.len().max(1)
}

fn extract_footprint(form: &SExpr, warnings: &mut Vec<String>) -> Result<Footprint, ModelError> {
    let lib_id = form
        .arg(0)
        .and_then(|n| n.atom_text())
        .ok_or(ModelError::MalformedForm {
            context: "footprint",
            line: form.line,
        })?
        .to_string();
    let side = match form
        .child_named("layer")
        .and_then(|l| l.arg(0))
        .and_then(|n| n.atom_text())
    {
        Some("B.Cu") => Side::Bottom,
        _ => Side::Top,
    };
    let (at, rot_deg) = at_of(form.child_named("at"), "footprint at", form.line)?;

    // KiCad 7+ stores the reference as a property; older files use fp_text.
    let mut reference = form
        .children_named("property")
        .find(|p| p.arg(0).and_then(|n| n.atom_text()) == Some("Reference"))
        .and_then(|p| p.arg(1))
        .and_then(|n| n.atom_text())
        .map(str::to_string);
    if reference.is_none() {
        reference = form
            .children_named("fp_text")
            .find(|t| t.arg(0).and_then(|n| n.atom_text()) == Some("reference"))
            .and_then(|t| t.arg(1))
            .and_then(|n| n.atom_text())
            .map(str::to_string);
    }
    let reference = reference.unwrap_or_else(|| {
        warnings.push(format!("footprint on line {} has no reference", form.line));
        format!("?{}", form.line)
    });

    let mut pads = Vec::new();
    for pad_form in form.children_named("pad") {
        let number = pad_form
            .arg(0)
            .and_then(|n| n.atom_text())
            .unwrap_or("")
            .to_string();
        let kind_text = pad_form.arg(1).and_then(|n| n.atom_text()).unwrap_or("");
        let kind = match kind_text {
            "smd" | "connect" => PadKind::Smd,
            "thru_hole" | "np_thru_hole" => PadKind::ThruHole,
            _ => {
                return Err(ModelError::MalformedForm {
                    context: "pad kind",
                    line: pad_form.line,
                })
            }
        };
        let (at_rel, abs_rot) = at_of(pad_form.child_named("at"), "pad at", pad_form.line)?;
        let size_form = pad_form
            .child_named("size")
            .ok_or(ModelError::MalformedForm {
                context: "pad size",
                line: pad_form.line,
            })?;
        let size = Vector2::new(
            size_form.arg(0).and_then(|n| n.as_f64()).unwrap_or(0.0),
            size_form.arg(1).and_then(|n| n.as_f64()).unwrap_or(0.0),
        );
        let drill = pad_form
            .child_named("drill")
            .and_then(|d| d.arg(0))
            .and_then(|n| n.as_f64());
        let pad_side = match kind {
            PadKind::ThruHole => side,
            PadKind::Smd => {
                let copper = pad_form
                    .child_named("layers")
                    .and_then(|l| l.as_list())
                    .unwrap_or(&[])
                    .iter()
                    .skip(1)
                    .filter_map(|n| n.atom_text())
                    .find(|n| n.ends_with(".Cu"));
                match copper {
                    Some("F.Cu") => Side::Top,
                    Some("B.Cu") => Side::Bottom,
                    _ => side,
                }
            }
        };
        let net = pad_form
            .child_named("net")
            .and_then(|n| n.arg(0))
            .and_then(|n| n.as_f64())
            .map(|id| id as NetId)
            .filter(|&id| id != 0);
        pads.push(Pad {
            number,
            at_rel,
            // The file stores the absolute pad angle; keep the local one.
            rot_deg: normalize_deg(abs_rot - rot_deg),
            size,
            drill,
            kind,
            side: pad_side,
            net,
        });
    }

    Ok(Footprint {
        reference,
        lib_id,
        at,
        rot_deg,
        side,
        pads,
    })
}

fn point_of(
    form: Option<&SExpr>,
    context: &'static str,
    line: usize,
) -> Result<Point2<f64>, ModelError> {
    let form = form.ok_or(ModelError::MalformedForm { context, line })?;
    let x = form.arg(0).and_then(|n| n.as_f64());
    let y = form.arg(1).and_then(|n| n.as_f64());
    match (x, y) {
        (Some(x), Some(y)) => Ok(Point2::new(x, -y)),
        _ => Err(ModelError::MalformedForm {
            context,
            line: form.line,
        }),
    }
}

/// Reads `(at x y [rot])`, negating Y and normalizing the angle.
fn at_of(
    form: Option<&SExpr>,
    context: &'static str,
    line: usize,
) -> Result<(Point2<f64>, f64), ModelError> {
    let point = point_of(form, context, line)?;
    let rot = form
        .and_then(|f| f.arg(2))
        .and_then(|n| n.as_f64())
        .unwrap_or(0.0);
    Ok((point, normalize_deg(rot)))
}

fn float_of(form: Option<&SExpr>, context: &'static str, line: usize) -> Result<f64, ModelError> {
    form.and_then(|f| f.arg(0))
        .and_then(|n| n.as_f64())
        .ok_or(ModelError::MalformedForm { context, line })
}

fn str_of(form: Option<&SExpr>, context: &'static str, line: usize) -> Result<String, ModelError> {
    form.and_then(|f| f.arg(0))
        .and_then(|n| n.atom_text())
        .map(str::to_string)
        .ok_or(ModelError::MalformedForm { context, line })
}

/// A closed outline in traversal order, counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedOutline {
    pub elements: Vec<OutlineElem>,
    /// Closed loops other than the outer one. Internal cutouts are not
    /// supported; callers surface these as warnings.
    pub rejected_loops: Vec<Vec<OutlineElem>>,
}

/// Chains outline elements into a closed loop, reversing elements as needed
/// so consecutive endpoints match within `tol`. The result always runs
/// counterclockwise. When several closed loops exist, the one with the
/// largest bounding box is kept and the rest are reported for rejection.
pub fn sort_outline(elems: &[OutlineElem], tol: f64) -> Result<SortedOutline, ModelError> {
    if elems.is_empty() {
        return Err(ModelError::MissingOutline);
    }
    let mut remaining: Vec<OutlineElem> = elems.to_vec();
    let mut loops: Vec<Vec<OutlineElem>> = Vec::new();

    while !remaining.is_empty() {
        let mut chain = vec![remaining.remove(0)];
        let loop_start = chain[0].start();
        loop {
            let tail = chain.last().unwrap().end();
            if chain.len() > 1 && (tail - loop_start).norm() <= tol {
                break;
            }
            let next = remaining.iter().position(|e| {
                (e.start() - tail).norm() <= tol || (e.end() - tail).norm() <= tol
            });
            match next {
                Some(idx) => {
                    let elem = remaining.remove(idx);
                    if (elem.start() - tail).norm() <= tol {
                        chain.push(elem);
                    } else {
                        chain.push(elem.reversed());
                    }
                }
                None => {
                    // A single element can close on itself (e.g. a circle
                    // emitted as one arc would not, but a degenerate file
                    // might); otherwise the outline is open.
                    return Err(ModelError::OpenOutline {
                        x: tail.x,
                        y: tail.y,
                    });
                }
            }
        }
        loops.push(chain);
    }

    // Largest bounding box wins; area would also work but the bbox needs
    // no tessellation.
    let outer = loops
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            let extent = |chain: &[OutlineElem]| {
                let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
                let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
                for e in chain {
                    for p in [e.start(), e.end()] {
                        min = Point2::new(min.x.min(p.x), min.y.min(p.y));
                        max = Point2::new(max.x.max(p.x), max.y.max(p.y));
                    }
                }
                (max.x - min.x) * (max.y - min.y)
            };
            extent(a).total_cmp(&extent(b))
        })
        .map(|(i, _)| i)
        .unwrap();
    let mut elements = loops.remove(outer);

    if signed_area(&elements) < 0.0 {
        elements.reverse();
        for e in &mut elements {
            *e = e.reversed();
        }
    }

    Ok(SortedOutline {
        elements,
        rejected_loops: loops,
    })
}

/// Shoelace area of the loop, arcs approximated well enough for a sign.
fn signed_area(elems: &[OutlineElem]) -> f64 {
    let mut points = Vec::new();
    for e in elems {
        match e.tessellate(0.05) {
            Ok(mut pts) => {
                pts.pop();
                points.extend(pts);
            }
            // Collinear "arcs" contribute their chord to the sign estimate.
            Err(_) => points.push(e.start()),
        }
    }
    let mut area = 0.0;
    for (i, p) in points.iter().enumerate() {
        let q = points[(i + 1) % points.len()];
        area += p.x * q.y - q.x * p.y;
    }
    area / 2.0
}

/// Center of the circle through three points.
pub fn circumcenter(
    a: Point2<f64>,
    b: Point2<f64>,
    c: Point2<f64>,
) -> Result<Point2<f64>, ModelError> {
    let d = 2.0 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
    let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
    if d.abs() <= 1e-12 * scale.max(1.0) * scale.max(1.0) {
        return Err(ModelError::CollinearArc {
            x0: a.x,
            y0: a.y,
            x1: b.x,
            y1: b.y,
            x2: c.x,
            y2: c.y,
        });
    }
    let a2 = a.coords.norm_squared();
    let b2 = b.coords.norm_squared();
    let c2 = c.coords.norm_squared();
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    Ok(Point2::new(ux, uy))
}

/// Approximates a three-point arc by a polyline whose chords deviate from
/// the true arc by at most `chord_tol`. Endpoints are kept exactly so
/// chained outline elements stay connected.
pub fn arc_to_polyline(
    start: Point2<f64>,
    mid: Point2<f64>,
    end: Point2<f64>,
    chord_tol: f64,
) -> Result<Vec<Point2<f64>>, ModelError> {
    let center = circumcenter(start, mid, end)?;
    let radius = (start - center).norm();

    let angle_of = |p: Point2<f64>| (p.y - center.y).atan2(p.x - center.x);
    let theta_start = angle_of(start);
    let theta_mid = angle_of(mid);
    let theta_end = angle_of(end);

    // Counterclockwise sweep from `from` to `to`, in (0, 2pi].
    let ccw_sweep = |from: f64, to: f64| {
        let mut s = to - from;
        while s <= 0.0 {
            s += std::f64::consts::TAU;
        }
        s
    };
    // The arc runs in whichever direction passes through `mid`.
    let ccw = ccw_sweep(theta_start, theta_mid) <= ccw_sweep(theta_start, theta_end);
    let sweep = if ccw {
        ccw_sweep(theta_start, theta_end)
    } else {
        -ccw_sweep(theta_end, theta_start)
    };

    // Chord sagitta r(1 - cos(step/2)) stays below tolerance.
    let max_step = if chord_tol >= radius {
        std::f64::consts::FRAC_PI_2
    } else {
        2.0 * (1.0 - chord_tol / radius).acos()
    };
    let n = ((sweep.abs() / max_step).ceil() as usize).clamp(1, 4096);

    let mut points = Vec::with_capacity(n + 1);
    points.push(start);
    for i in 1..n {
        let theta = theta_start + sweep * (i as f64) / (n as f64);
        points.push(Point2::new(
            center.x + radius * theta.cos(),
            center.y + radius * theta.sin(),
        ));
    }
    points.push(end);
    Ok(points)
}
