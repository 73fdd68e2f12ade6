//! Electrical and material desk analysis.
//!
//! Channels are modeled as uniform liquid-metal conductors: every segment
//! and via becomes a resistor, junctions merge within a small tolerance,
//! and per-net resistance comes from nodal analysis on the conductance
//! matrix. Mass estimates multiply measured channel volumes by alloy
//! density. There is no thermal or signal model; the current check only
//! compares assignments against the process limit and reports I²R numbers.

use crate::geom::{self, GeomError, Solid, VolumeEstimate};
use crate::pcb_model::{NetId, PcbDesign, PadKind, Side};
use crate::process::{ProcessError, ProcessParams, Stackup};
use crate::synth::ChannelSet;
use nalgebra::{DMatrix, DVector, Point2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("nodes {a} and {b} are not connected")]
    Disconnected { a: usize, b: usize },
    #[error("conductance system is singular: {0}")]
    SingularSystem(String),
    #[error("unknown net `{0}`")]
    UnknownNet(String),
    #[error("invalid material constants: {0}")]
    InvalidConstants(String),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// µΩ·cm to Ω·mm, so resistances come out in ohms from mm geometry.
const UOHM_CM_TO_OHM_MM: f64 = 1e-5;

/// Multimeter average for a 30 mm × 0.7 mm × 0.7 mm alloy channel, Ω.
/// About 1.69× the ρL/A figure; the gap (contact resistance? partial
/// fill?) is unexplained, so reports show it next to nominal values and
/// never fold it in.
pub const MEASURED_REFERENCE_RESISTANCE: f64 = 0.03;

/// Geometry of the bench-measured reference channel, mm.
pub const REFERENCE_CHANNEL: (f64, f64, f64) = (30.0, 0.7, 0.7);

/// Junction points closer than this merge into one node.
const MERGE_TOL: f64 = 1e-3;

/// Bulk material properties used across the electrical and mass reports.
///
/// The alloy resistivity and the gallium/indium blend recipe (75.5/24.5 by
/// weight) are the headline numbers; copper is kept alongside for the
/// comparison column. Densities and the copper resistivity are standard
/// literature values. Note the bundled lifecycle data implies a 75/25
/// split; [`MaterialConstants::as_inventoried`] matches that accounting,
/// and both presets are kept because the sources disagree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialConstants {
    /// Liquid-metal alloy resistivity, µΩ·cm.
    pub resistivity_alloy: f64,
    /// 1 oz copper resistivity for the comparison column, µΩ·cm.
    pub resistivity_copper: f64,
    /// Alloy density, g/cm³.
    pub density_alloy: f64,
    /// Substrate filament density, g/cm³.
    pub density_substrate: f64,
    /// Gallium weight fraction of the alloy.
    pub ga_fraction: f64,
    /// Indium weight fraction; must sum with `ga_fraction` to 1.
    pub in_fraction: f64,
    /// Printed infill ratio applied to the substrate mass upper bound.
    pub fill_factor: f64,
}

impl Default for MaterialConstants {
    fn default() -> Self {
        MaterialConstants {
            resistivity_alloy: 29.0,
            resistivity_copper: 1.68,
            density_alloy: 6.25,
            density_substrate: 1.23,
            ga_fraction: 0.755,
            in_fraction: 0.245,
            fill_factor: 1.0,
        }
    }
}

impl MaterialConstants {
    /// Preset matching the bundled lifecycle inventory's implied 75/25
    /// gallium/indium split (0.651 g + 0.217 g → 0.868 g).
    pub fn as_inventoried() -> MaterialConstants {
        MaterialConstants {
            ga_fraction: 0.75,
            in_fraction: 0.25,
            ..MaterialConstants::default()
        }
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let positive = [
            ("resistivity_alloy", self.resistivity_alloy),
            ("resistivity_copper", self.resistivity_copper),
            ("density_alloy", self.density_alloy),
            ("density_substrate", self.density_substrate),
            ("ga_fraction", self.ga_fraction),
            ("in_fraction", self.in_fraction),
            ("fill_factor", self.fill_factor),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(AnalysisError::InvalidConstants(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if (self.ga_fraction + self.in_fraction - 1.0).abs() > 1e-9 {
            return Err(AnalysisError::InvalidConstants(format!(
                "ga_fraction + in_fraction must be 1, got {}",
                self.ga_fraction + self.in_fraction
            )));
        }
        if self.fill_factor > 1.0 {
            return Err(AnalysisError::InvalidConstants(format!(
                "fill_factor must be at most 1, got {}",
                self.fill_factor
            )));
        }
        Ok(())
    }
}

/// Resistance of a rectangular channel, Ω. Inputs in mm, resistivity in
/// µΩ·cm.
pub fn trace_resistance(length: f64, width: f64, height: f64, resistivity: f64) -> f64 {
    assert!(
        length > 0.0 && width > 0.0 && height > 0.0 && resistivity > 0.0,
        "trace_resistance inputs must be positive"
    );
    resistivity * UOHM_CM_TO_OHM_MM * length / (width * height)
}

/// Resistance of a cylindrical channel (via barrel), Ω.
pub fn via_resistance(span: f64, diameter: f64, resistivity: f64) -> f64 {
    assert!(
        span > 0.0 && diameter > 0.0 && resistivity > 0.0,
        "via_resistance inputs must be positive"
    );
    let area = std::f64::consts::PI * (diameter / 2.0) * (diameter / 2.0);
    resistivity * UOHM_CM_TO_OHM_MM * span / area
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetNode {
    pub at: Point2<f64>,
    pub layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetEdge {
    pub a: usize,
    pub b: usize,
    pub resistance: f64,
    /// Source element, e.g. `seg L1 (5.0000,10.0000)-(9.0500,10.0000)`.
    pub element: String,
}

/// Resistor network of one net.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetGraph {
    pub net: NetId,
    pub name: String,
    pub nodes: Vec<NetNode>,
    pub edges: Vec<NetEdge>,
    /// Pad label ("R1.1") to the node it lands on.
    pub terminals: BTreeMap<String, usize>,
    /// False when some element or pad is electrically unreachable from
    /// the rest of the net.
    pub connected: bool,
}

impl NetGraph {
    /// Index of the node within the merge tolerance of a point, if any.
    pub fn node_near(&self, at: Point2<f64>, layer: usize) -> Option<usize> {
        self.nodes
            .iter()
            .position(|n| n.layer == layer && (n.at - at).norm() <= MERGE_TOL)
    }
}

struct GraphBuilder {
    nodes: Vec<NetNode>,
    edges: Vec<NetEdge>,
    terminals: BTreeMap<String, usize>,
    /// Union-find parent links; through-hole pins merge nodes across layers.
    parent: Vec<usize>,
}

impl GraphBuilder {
    fn new() -> GraphBuilder {
        GraphBuilder {
            nodes: Vec::new(),
            edges: Vec::new(),
            terminals: BTreeMap::new(),
            parent: Vec::new(),
        }
    }

    fn node_at(&mut self, at: Point2<f64>, layer: usize) -> usize {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.layer == layer && (n.at - at).norm() <= MERGE_TOL {
                return i;
            }
        }
        self.nodes.push(NetNode { at, layer });
        self.parent.push(self.parent.len());
        self.nodes.len() - 1
    }

    fn root(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.root(a), self.root(b));
        // Keep the lower index as representative for determinism.
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
    }

    fn finish(mut self, net: NetId, name: String) -> NetGraph {
        // Compact union-find classes into a dense node list.
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for i in 0..self.nodes.len() {
            let r = self.root(i);
            if remap[r] == usize::MAX {
                remap[r] = nodes.len();
                nodes.push(self.nodes[r].clone());
            }
            remap[i] = remap[r];
        }
        let edges: Vec<NetEdge> = self
            .edges
            .into_iter()
            .map(|e| NetEdge {
                a: remap[e.a],
                b: remap[e.b],
                ..e
            })
            .collect();
        let terminals: BTreeMap<String, usize> = self
            .terminals
            .into_iter()
            .map(|(label, i)| (label, remap[i]))
            .collect();

        let connected = match nodes.len() {
            0 | 1 => true,
            n => {
                let mut adjacent = vec![Vec::new(); n];
                for e in &edges {
                    adjacent[e.a].push(e.b);
                    adjacent[e.b].push(e.a);
                }
                let mut seen = vec![false; n];
                let mut stack = vec![0];
                seen[0] = true;
                while let Some(i) = stack.pop() {
                    for &j in &adjacent[i] {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
                seen.into_iter().all(|s| s)
            }
        };
        NetGraph {
            net,
            name,
            nodes,
            edges,
            terminals,
            connected,
        }
    }
}

/// Builds one resistor network per named net.
///
/// One edge per segment, one per via; pads attach to the junction at their
/// center as zero-length terminals. A through-hole pin ties together every
/// layer's junction at its position, standing in for the inserted lead.
/// Segments shorter than the merge tolerance collapse to a single node and
/// produce no edge.
pub fn build_net_graph(
    design: &PcbDesign,
    params: &ProcessParams,
    constants: &MaterialConstants,
) -> Result<BTreeMap<NetId, NetGraph>, AnalysisError> {
    constants.validate()?;
    let stackup = Stackup::new(design.copper_layer_count, params)?;
    let rho = constants.resistivity_alloy;
    let mut graphs = BTreeMap::new();

    for (&net, name) in &design.nets {
        let mut b = GraphBuilder::new();

        for seg in design.segments.iter().filter(|s| s.net == net) {
            let na = b.node_at(seg.start, seg.layer);
            let nb = b.node_at(seg.end, seg.layer);
            if na == nb {
                continue;
            }
            b.edges.push(NetEdge {
                a: na,
                b: nb,
                resistance: trace_resistance(seg.length(), seg.width, params.trace_height, rho),
                element: format!(
                    "seg L{} ({:.4},{:.4})-({:.4},{:.4})",
                    seg.layer, seg.start.x, seg.start.y, seg.end.x, seg.end.y
                ),
            });
        }

        for via in design.vias.iter().filter(|v| v.net == net) {
            let na = b.node_at(via.at, via.layer_from);
            let nb = b.node_at(via.at, via.layer_to);
            if na == nb {
                continue;
            }
            let span = stackup.layer_z_range(via.layer_to).1 - stackup.layer_z_range(via.layer_from).0;
            b.edges.push(NetEdge {
                a: na,
                b: nb,
                resistance: via_resistance(span, via.diameter, rho),
                element: format!("via ({:.4},{:.4})", via.at.x, via.at.y),
            });
        }

        for fp in &design.footprints {
            for pad in fp.pads.iter().filter(|p| p.net == Some(net)) {
                let (center, _) = fp.pad_placement(pad);
                let label = format!("{}.{}", fp.reference, pad.number);
                let terminal = match pad.kind {
                    PadKind::Smd => {
                        let layer = match pad.side {
                            Side::Top => design.copper_layer_count - 1,
                            Side::Bottom => 0,
                        };
                        b.node_at(center, layer)
                    }
                    PadKind::ThruHole => {
                        let touching: Vec<usize> = (0..design.copper_layer_count)
                            .filter_map(|layer| {
                                b.nodes.iter().position(|n| {
                                    n.layer == layer && (n.at - center).norm() <= MERGE_TOL
                                })
                            })
                            .collect();
                        match touching.split_first() {
                            Some((&first, rest)) => {
                                for &other in rest {
                                    b.merge(first, other);
                                }
                                first
                            }
                            None => b.node_at(center, 0),
                        }
                    }
                };
                b.terminals.insert(label, terminal);
            }
        }

        graphs.insert(net, b.finish(net, name.clone()));
    }
    Ok(graphs)
}

/// Two-terminal resistance by nodal analysis: unit current in at `a`, out
/// at `b`, ground at `b`, solve the restricted conductance matrix, and
/// read the voltage at `a`. Symmetric in its arguments.
pub fn net_resistance(g: &NetGraph, a: usize, b: usize) -> Result<f64, AnalysisError> {
    assert!(a < g.nodes.len() && b < g.nodes.len(), "node out of range");
    if a == b {
        return Ok(0.0);
    }

    let n = g.nodes.len();
    let mut adjacent = vec![Vec::new(); n];
    for e in &g.edges {
        if e.a != e.b {
            adjacent[e.a].push(e.b);
            adjacent[e.b].push(e.a);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![a];
    seen[a] = true;
    while let Some(i) = stack.pop() {
        for &j in &adjacent[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if !seen[b] {
        return Err(AnalysisError::Disconnected { a, b });
    }

    // Unknowns: component nodes except the grounded one.
    let unknowns: Vec<usize> = (0..n).filter(|&i| seen[i] && i != b).collect();
    let index: BTreeMap<usize, usize> = unknowns.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let dim = unknowns.len();
    let mut lap = DMatrix::<f64>::zeros(dim, dim);
    for e in &g.edges {
        if e.a == e.b || !seen[e.a] {
            continue;
        }
        let conductance = 1.0 / e.resistance;
        for (from, to) in [(e.a, e.b), (e.b, e.a)] {
            if let Some(&i) = index.get(&from) {
                lap[(i, i)] += conductance;
                if let Some(&j) = index.get(&to) {
                    lap[(i, j)] -= conductance;
                }
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(dim);
    rhs[index[&a]] = 1.0;

    let solution = lap
        .lu()
        .solve(&rhs)
        .ok_or_else(|| AnalysisError::SingularSystem("conductance matrix did not factor".into()))?;
    let r = solution[index[&a]];
    if !r.is_finite() {
        return Err(AnalysisError::SingularSystem(format!(
            "non-finite resistance {r}"
        )));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDissipation {
    pub element: String,
    pub resistance: f64,
    /// Watts at the assigned current.
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentReport {
    pub net: NetId,
    pub name: String,
    pub current: f64,
    pub limit: f64,
    /// True when the assignment exceeds the process current limit.
    pub exceeds: bool,
    /// Per-element I²R at the full assigned current. An upper bound for
    /// any terminal pair, since real branch currents divide.
    pub edges: Vec<EdgeDissipation>,
}

impl CurrentReport {
    pub fn warning(&self) -> Option<String> {
        self.exceeds.then(|| {
            format!(
                "net `{}` assigned {} A exceeds the {} A limit",
                self.name, self.current, self.limit
            )
        })
    }
}

/// Compares per-net current assignments (by net name) against the process
/// limit. The limit is inclusive: a net at exactly the limit passes.
pub fn current_check(
    design: &PcbDesign,
    graphs: &BTreeMap<NetId, NetGraph>,
    net_currents: &BTreeMap<String, f64>,
    params: &ProcessParams,
) -> Result<Vec<CurrentReport>, AnalysisError> {
    let mut reports = Vec::new();
    for (name, &current) in net_currents {
        assert!(current >= 0.0, "currents must be non-negative");
        let (&net, _) = design
            .nets
            .iter()
            .find(|(_, n)| *n == name)
            .ok_or_else(|| AnalysisError::UnknownNet(name.clone()))?;
        let graph = graphs
            .get(&net)
            .ok_or_else(|| AnalysisError::UnknownNet(name.clone()))?;
        let edges = graph
            .edges
            .iter()
            .map(|e| EdgeDissipation {
                element: e.element.clone(),
                resistance: e.resistance,
                power: current * current * e.resistance,
            })
            .collect();
        reports.push(CurrentReport {
            net,
            name: name.clone(),
            current,
            limit: params.max_current,
            exceeds: current > params.max_current,
            edges,
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetMaterial {
    pub name: String,
    pub volume: f64,
    pub volume_error: f64,
    /// Grams of alloy to fill this net's channels.
    pub mass: f64,
}

/// Mass and volume accounting for one assembled board.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaterialReport {
    pub per_net: BTreeMap<NetId, NetMaterial>,
    /// Total channel volume, mm³, with the summed estimate error.
    pub alloy_volume: f64,
    pub alloy_volume_error: f64,
    /// Total alloy mass, grams; gallium and indium split by weight
    /// fraction. The indium mass is the exact remainder, so the two always
    /// sum back to the total.
    pub alloy_mass: f64,
    pub ga_mass: f64,
    pub in_mass: f64,
    /// Printed body volume (channels already subtracted), mm³.
    pub body_volume: f64,
    pub body_volume_error: f64,
    /// Substrate mass upper bound: body volume × density × fill factor.
    pub substrate_mass: f64,
    pub fill_factor: f64,
}

const G_PER_CM3_TO_G_PER_MM3: f64 = 1e-3;

/// Estimates alloy and substrate masses from measured volumes. Channel
/// volumes are reused from the assembly; the board solid is measured here
/// at the given grid pitch.
pub fn material_estimate(
    channels: &ChannelSet,
    board: &Solid,
    constants: &MaterialConstants,
    pitch: f64,
) -> Result<MaterialReport, AnalysisError> {
    constants.validate()?;
    let alloy_density = constants.density_alloy * G_PER_CM3_TO_G_PER_MM3;

    let mut per_net = BTreeMap::new();
    let mut alloy_volume = 0.0;
    let mut alloy_volume_error = 0.0;
    for (&net, channel) in &channels.nets {
        alloy_volume += channel.volume.value;
        alloy_volume_error += channel.volume.error_bound;
        per_net.insert(
            net,
            NetMaterial {
                name: channel.name.clone(),
                volume: channel.volume.value,
                volume_error: channel.volume.error_bound,
                mass: channel.volume.value * alloy_density,
            },
        );
    }
    let alloy_mass = alloy_volume * alloy_density;
    let ga_mass = alloy_mass * constants.ga_fraction;

    let body = if matches!(board, Solid::Empty) {
        VolumeEstimate::ZERO
    } else {
        geom::volume(board, pitch)?
    };
    Ok(MaterialReport {
        per_net,
        alloy_volume,
        alloy_volume_error,
        alloy_mass,
        ga_mass,
        in_mass: alloy_mass - ga_mass,
        body_volume: body.value,
        body_volume_error: body.error_bound,
        substrate_mass: body.value
            * constants.density_substrate
            * G_PER_CM3_TO_G_PER_MM3
            * constants.fill_factor,
        fill_factor: constants.fill_factor,
    })
}
