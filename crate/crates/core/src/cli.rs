//! Command-line front end.
//!
//! Five subcommands wire the pipeline together: `inspect` summarizes a
//! parsed board, `drc` checks printability rules, `synth` writes the
//! printable STL plus a manifest, `estimate` reports electrical figures
//! and material masses, and `inventory` compares fabrication inventories.
//!
//! Exit codes: 0 success, 1 rule violations, 2 operational errors.

use crate::analysis::{
    self, build_net_graph, current_check, material_estimate, trace_resistance, AnalysisError,
    CurrentReport, MaterialConstants, MaterialReport,
};
use crate::drc::{run_drc, DrcViolation};
use crate::geom::GeomError;
use crate::inventory::{inventory_report, FactorTable, InventoryError, InventoryRecord};
use crate::meshing::{self, MeshError};
use crate::pcb_model::{extract_design, ModelError, NetId, PcbDesign};
use crate::process::{validate_params, Nozzle, ProcessOverrides, ProcessParams, ProcessError, Stackup};
use crate::sexpr::{parse_sexpr, ParseError};
use crate::socket::{SocketError, SocketLibrary};
use crate::stl::{write_stl, StlMode};
use crate::synth::{assemble, AssembleOptions, SynthError};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::error::Error as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            2
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config {path}")]
    Config {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("record {path}")]
    Record {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Process(#[from] ProcessError),
    #[error(transparent)]
    Socket(#[from] SocketError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Inventory(#[from] InventoryError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("report serialization")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser)]
#[command(
    name = "lmpcb",
    version,
    about = "Converts KiCad boards into printable PVA substrates with liquid-metal channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a board file and print a structural summary.
    Inspect(InspectArgs),
    /// Check printability design rules; exits 1 when violations exist.
    Drc(DrcArgs),
    /// Build the printable solid and write an STL plus a JSON manifest.
    Synth(SynthArgs),
    /// Report per-net resistance, current headroom, and material masses.
    Estimate(EstimateArgs),
    /// Compare material and energy inventories of fabrication routes.
    Inventory(InventoryArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StlModeArg {
    Ascii,
    Binary,
}

impl From<StlModeArg> for StlMode {
    fn from(mode: StlModeArg) -> StlMode {
        match mode {
            StlModeArg::Ascii => StlMode::Ascii,
            StlModeArg::Binary => StlMode::Binary,
        }
    }
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Board file (.kicad_pcb).
    input: PathBuf,
    /// JSON config: {"process": {...}, "materials": {...}, "mesh": {...},
    /// "net_currents": {"NET": amps}}. Flags override config values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report style on stdout.
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Socket library JSON; falls back to $LMPCB_SOCKET_LIB, then the
    /// bundled library.
    #[arg(long)]
    socket_lib: Option<PathBuf>,
}

#[derive(clap::Args)]
struct InspectArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(clap::Args)]
struct DrcArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also write the JSON violation report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SynthArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory for the STL and manifest.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Surface mesh grid pitch, mm.
    #[arg(long)]
    mesh_pitch: Option<f64>,
    /// Volume measurement grid pitch, mm.
    #[arg(long)]
    volume_pitch: Option<f64>,
    /// STL flavor.
    #[arg(long, value_enum)]
    stl_mode: Option<StlModeArg>,
    /// Produce output even when design rules are violated.
    #[arg(long)]
    force: bool,
}

#[derive(clap::Args)]
struct EstimateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Volume measurement grid pitch, mm.
    #[arg(long)]
    volume_pitch: Option<f64>,
    /// Per-net current assignment, repeatable: NET=amps.
    #[arg(long = "net-current", value_parser = parse_net_current)]
    net_currents: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BundleArg {
    Pva,
    Fr4,
}

fn bundled_record(bundle: BundleArg) -> InventoryRecord {
    match bundle {
        BundleArg::Pva => InventoryRecord::bundled_pva(),
        BundleArg::Fr4 => InventoryRecord::bundled_fr4(),
    }
}

#[derive(clap::Args)]
struct InventoryArgs {
    /// Bundled record for the subject side; the other bundle is the
    /// baseline unless overridden.
    #[arg(long, value_enum, default_value_t = BundleArg::Pva)]
    bundled: BundleArg,
    /// JSON inventory record replacing the subject side.
    #[arg(long)]
    record: Option<PathBuf>,
    /// JSON inventory record replacing the baseline side.
    #[arg(long)]
    baseline_record: Option<PathBuf>,
    /// Characterization factor CSV (item, indicator, factor, unit).
    /// Impact sums appear only when this is given.
    #[arg(long)]
    factors: Option<PathBuf>,
    /// Report style on stdout.
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

fn parse_net_current(s: &str) -> Result<(String, f64), String> {
    let (net, amps) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NET=amps, got `{s}`"))?;
    let amps: f64 = amps
        .parse()
        .map_err(|_| format!("`{amps}` is not a number"))?;
    if !(amps >= 0.0 && amps.is_finite()) {
        return Err(format!("current must be non-negative, got {amps}"));
    }
    Ok((net.to_string(), amps))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MeshConfig {
    pitch: f64,
    volume_pitch: f64,
    mode: StlModeArg,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig {
            pitch: 0.1,
            volume_pitch: 0.05,
            mode: StlModeArg::Ascii,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    process: ProcessOverrides,
    materials: MaterialConstants,
    mesh: MeshConfig,
    net_currents: BTreeMap<String, f64>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Config {
        path: path.to_path_buf(),
        source,
    })
}

fn effective_params(config: &FileConfig) -> Result<ProcessParams, CliError> {
    let params = config.process.apply(&ProcessParams::default());
    let violations = validate_params(&params);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Invalid(format!(
            "process parameters out of range: {}",
            list.join("; ")
        )));
    }
    Ok(params)
}

fn load_design(path: &Path) -> Result<PcbDesign, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let root = parse_sexpr(&text)?;
    let design = extract_design(&root)?;
    for w in &design.warnings {
        eprintln!("warning: {w}");
    }
    Ok(design)
}

fn ensure_positive(name: &str, value: f64) -> Result<(), CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Inspect(args) => cmd_inspect(args),
        Command::Drc(args) => cmd_drc(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Inventory(args) => cmd_inventory(args),
    }
}

#[derive(Serialize)]
struct InspectReport {
    input: String,
    copper_layers: usize,
    nets: usize,
    segments: usize,
    vias: usize,
    footprints: usize,
    outline_elements: usize,
    /// `[[min_x, min_y], [max_x, max_y]]` of the outer outline.
    board_bbox: Option<[[f64; 2]; 2]>,
    board_height: f64,
    warnings: Vec<String>,
}

fn outline_bbox(design: &PcbDesign) -> Option<[[f64; 2]; 2]> {
    let sorted = crate::pcb_model::sort_outline(&design.outline, 1e-3).ok()?;
    let points = crate::synth::tessellate_loop(&sorted.elements, 0.01).ok()?;
    let mut min = [f64::INFINITY; 2];
    let mut max = [f64::NEG_INFINITY; 2];
    for p in points {
        min[0] = min[0].min(p.x);
        min[1] = min[1].min(p.y);
        max[0] = max[0].max(p.x);
        max[1] = max[1].max(p.y);
    }
    Some([min, max])
}

fn cmd_inspect(args: InspectArgs) -> Result<i32, CliError> {
    let config = load_config(args.common.config.as_deref())?;
    let params = effective_params(&config)?;
    let design = load_design(&args.common.input)?;
    let stackup = Stackup::new(design.copper_layer_count, &params)?;
    let report = InspectReport {
        input: args.common.input.display().to_string(),
        copper_layers: design.copper_layer_count,
        nets: design.nets.len(),
        segments: design.segments.len(),
        vias: design.vias.len(),
        footprints: design.footprints.len(),
        outline_elements: design.outline.len(),
        board_bbox: outline_bbox(&design),
        board_height: stackup.board_height,
        warnings: design.warnings.clone(),
    };
    match args.common.format {
        FormatArg::Json => print_json(&report)?,
        FormatArg::Table => {
            println!("board: {}", report.input);
            println!("copper layers: {}", report.copper_layers);
            println!("nets: {}", report.nets);
            println!("segments: {}", report.segments);
            println!("vias: {}", report.vias);
            println!("footprints: {}", report.footprints);
            println!("outline elements: {}", report.outline_elements);
            match report.board_bbox {
                Some([min, max]) => println!(
                    "board bbox: ({:.4}, {:.4}) .. ({:.4}, {:.4})",
                    min[0], min[1], max[0], max[1]
                ),
                None => println!("board bbox: unavailable (outline does not close)"),
            }
            println!("board height: {} mm", report.board_height);
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct DrcReport {
    input: String,
    clean: bool,
    violations: Vec<DrcViolation>,
    params: ProcessParams,
}

fn cmd_drc(args: DrcArgs) -> Result<i32, CliError> {
    let config = load_config(args.common.config.as_deref())?;
    let params = effective_params(&config)?;
    let design = load_design(&args.common.input)?;
    let violations = run_drc(&design, &params);
    let report = DrcReport {
        input: args.common.input.display().to_string(),
        clean: violations.is_empty(),
        violations,
        params,
    };
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, text + "\n").map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
    }
    match args.common.format {
        FormatArg::Json => print_json(&report)?,
        FormatArg::Table => {
            if report.clean {
                println!("clean: no design rule violations");
            } else {
                println!("{} violation(s)", report.violations.len());
                for v in &report.violations {
                    println!(
                        "{:?}: {} | measured {:.4} limit {:.4} at ({:.4}, {:.4}){}",
                        v.rule,
                        v.subjects.join(" & "),
                        v.measured,
                        v.limit,
                        v.location[0],
                        v.location[1],
                        v.layer.map(|l| format!(" layer {l}")).unwrap_or_default()
                    );
                }
            }
        }
    }
    Ok(if report.clean { 0 } else { 1 })
}

/// Advisory slicer settings for the selected nozzle. Emitted as manifest
/// text only; no g-code is produced because slicers vary.
#[derive(Serialize)]
struct PrintProfile {
    nozzle_mm: f64,
    layer_height_mm: f64,
    wall_thickness_mm: f64,
    print_speed_mm_s: f64,
    retraction_mm: f64,
    bridge_speed_mm_s: f64,
    bridge_fan_percent: f64,
    bridge_infill_angle_deg: f64,
    note: String,
}

impl PrintProfile {
    fn for_nozzle(nozzle: Nozzle) -> PrintProfile {
        let (layer, wall) = match nozzle {
            Nozzle::Mm02 => (0.06, 0.15),
            Nozzle::Mm04 => (0.12, 0.3),
        };
        PrintProfile {
            nozzle_mm: nozzle.diameter(),
            layer_height_mm: layer,
            wall_thickness_mm: wall,
            print_speed_mm_s: 30.0,
            retraction_mm: 10.0,
            bridge_speed_mm_s: 15.0,
            bridge_fan_percent: 100.0,
            bridge_infill_angle_deg: 22.5,
            note: "advisory starting point: channel ceilings print as bridges, \
                   so keep bridge speed low and part cooling at full"
                .into(),
        }
    }
}

#[derive(Serialize)]
struct ManifestNet {
    net: NetId,
    name: String,
    solids: usize,
    volume_mm3: f64,
    volume_error_mm3: f64,
    outlets: usize,
}

#[derive(Serialize)]
struct Manifest {
    input: String,
    stl: String,
    stl_mode: String,
    stl_sha256: String,
    mesh_pitch_mm: f64,
    volume_pitch_mm: f64,
    triangles: usize,
    mesh_volume_mm3: f64,
    /// `[[min_x, min_y, min_z], [max_x, max_y, max_z]]` of the mesh.
    mesh_bbox: [[f64; 3]; 2],
    board_height_mm: f64,
    copper_layers: usize,
    params: ProcessParams,
    nets: Vec<ManifestNet>,
    socket_cavities: usize,
    violations: Vec<DrcViolation>,
    warnings: Vec<String>,
    print_profile: PrintProfile,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_synth(args: SynthArgs) -> Result<i32, CliError> {
    let config = load_config(args.common.config.as_deref())?;
    let params = effective_params(&config)?;
    let mesh_pitch = args.mesh_pitch.unwrap_or(config.mesh.pitch);
    let volume_pitch = args.volume_pitch.unwrap_or(config.mesh.volume_pitch);
    let stl_mode = args.stl_mode.unwrap_or(config.mesh.mode);
    ensure_positive("mesh pitch", mesh_pitch)?;
    ensure_positive("volume pitch", volume_pitch)?;
    if let Some(warning) = meshing::check_pitch(mesh_pitch, params.trace_width_min)? {
        eprintln!("warning: {warning}");
    }

    let design = load_design(&args.common.input)?;
    let lib = SocketLibrary::load(args.common.socket_lib.as_deref())?;

    let violations = run_drc(&design, &params);
    if !violations.is_empty() && !args.force {
        for v in &violations {
            eprintln!("{:?}: {} measured {:.4} limit {:.4}", v.rule, v.subjects.join(" & "), v.measured, v.limit);
        }
        eprintln!(
            "synthesis blocked by {} design rule violation(s); use --force to override",
            violations.len()
        );
        return Ok(1);
    }

    // The rule gate already ran, so assembly itself never re-blocks.
    let options = AssembleOptions {
        volume_pitch,
        force: true,
    };
    let assembly = assemble(&design, &params, &lib, &options)?;
    for w in &assembly.warnings {
        eprintln!("warning: {w}");
    }

    let mesh = meshing::extract_surface(&assembly.board, mesh_pitch)?;
    let mesh_volume = meshing::mesh_volume(&mesh)?;
    let stem = args
        .common
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "board".into());

    std::fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Write {
        path: args.out_dir.clone(),
        source,
    })?;
    let stl_name = format!("{stem}.stl");
    let stl_path = args.out_dir.join(&stl_name);
    let stl_bytes = write_stl(&mesh, &stem, stl_mode.into());
    std::fs::write(&stl_path, &stl_bytes).map_err(|source| CliError::Write {
        path: stl_path.clone(),
        source,
    })?;

    let bb = mesh.bbox();
    let manifest = Manifest {
        input: args.common.input.display().to_string(),
        stl: stl_name.clone(),
        stl_mode: match stl_mode {
            StlModeArg::Ascii => "ascii".into(),
            StlModeArg::Binary => "binary".into(),
        },
        stl_sha256: sha256_hex(&stl_bytes),
        mesh_pitch_mm: mesh_pitch,
        volume_pitch_mm: volume_pitch,
        triangles: mesh.triangles.len(),
        mesh_volume_mm3: mesh_volume,
        mesh_bbox: [
            [bb.min.x, bb.min.y, bb.min.z],
            [bb.max.x, bb.max.y, bb.max.z],
        ],
        board_height_mm: assembly.stackup.board_height,
        copper_layers: design.copper_layer_count,
        params,
        nets: assembly
            .channels
            .nets
            .values()
            .map(|c| ManifestNet {
                net: c.net,
                name: c.name.clone(),
                solids: c.solids.len(),
                volume_mm3: c.volume.value,
                volume_error_mm3: c.volume.error_bound,
                outlets: c.outlet_count,
            })
            .collect(),
        socket_cavities: assembly.cavities.len(),
        violations,
        warnings: assembly.warnings.clone(),
        print_profile: PrintProfile::for_nozzle(options_nozzle(&assembly)),
    };
    let manifest_path = args.out_dir.join(format!("{stem}.manifest.json"));
    let manifest_text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&manifest_path, manifest_text + "\n").map_err(|source| CliError::Write {
        path: manifest_path.clone(),
        source,
    })?;

    match args.common.format {
        FormatArg::Json => print_json(&manifest)?,
        FormatArg::Table => {
            println!("wrote {}", stl_path.display());
            println!("wrote {}", manifest_path.display());
            println!("triangles: {}", manifest.triangles);
            println!("mesh volume: {:.3} mm3", manifest.mesh_volume_mm3);
            println!("sha256: {}", manifest.stl_sha256);
            if !manifest.violations.is_empty() {
                println!(
                    "forced through {} design rule violation(s)",
                    manifest.violations.len()
                );
            }
        }
    }
    Ok(0)
}

fn options_nozzle(assembly: &crate::synth::Assembly) -> Nozzle {
    // The stackup does not retain the nozzle; recover it from the channel
    // height, which validate_params ties to the nozzle's minimum.
    if assembly.stackup.trace_height >= 0.9 {
        Nozzle::Mm04
    } else {
        Nozzle::Mm02
    }
}

#[derive(Serialize)]
struct EndToEnd {
    from: String,
    to: String,
    nominal_ohms: f64,
}

#[derive(Serialize)]
struct NetElectrical {
    net: NetId,
    name: String,
    connected: bool,
    edges: usize,
    terminals: Vec<String>,
    /// Resistance between the first and last terminal, when both exist
    /// and the net is connected.
    end_to_end: Option<EndToEnd>,
}

#[derive(Serialize)]
struct EstimateReport {
    input: String,
    materials: MaterialReport,
    resistance_note: String,
    nets: Vec<NetElectrical>,
    currents: Vec<CurrentReport>,
    warnings: Vec<String>,
}

fn cmd_estimate(args: EstimateArgs) -> Result<i32, CliError> {
    let config = load_config(args.common.config.as_deref())?;
    let params = effective_params(&config)?;
    let constants = config.materials.clone();
    constants.validate()?;
    let volume_pitch = args.volume_pitch.unwrap_or(config.mesh.volume_pitch);
    ensure_positive("volume pitch", volume_pitch)?;

    let design = load_design(&args.common.input)?;
    let lib = SocketLibrary::load(args.common.socket_lib.as_deref())?;
    // Estimates stay available on rule-violating boards; violations are
    // surfaced through the assembly warnings instead of blocking.
    let options = AssembleOptions {
        volume_pitch,
        force: true,
    };
    let assembly = assemble(&design, &params, &lib, &options)?;
    for w in &assembly.warnings {
        eprintln!("warning: {w}");
    }

    let materials = material_estimate(&assembly.channels, &assembly.board, &constants, volume_pitch)?;
    let graphs = build_net_graph(&design, &params, &constants)?;

    let nets: Vec<NetElectrical> = graphs
        .values()
        .map(|g| {
            let terminals: Vec<String> = g.terminals.keys().cloned().collect();
            let end_to_end = match (terminals.first(), terminals.last()) {
                (Some(from), Some(to)) if from != to && g.connected => {
                    let r = crate::analysis::net_resistance(
                        g,
                        g.terminals[from],
                        g.terminals[to],
                    );
                    r.ok().map(|nominal_ohms| EndToEnd {
                        from: from.clone(),
                        to: to.clone(),
                        nominal_ohms,
                    })
                }
                _ => None,
            };
            NetElectrical {
                net: g.net,
                name: g.name.clone(),
                connected: g.connected,
                edges: g.edges.len(),
                terminals,
                end_to_end,
            }
        })
        .collect();

    let mut net_currents = config.net_currents.clone();
    net_currents.extend(args.net_currents.iter().cloned());
    let currents = current_check(&design, &graphs, &net_currents, &params)?;
    let exceeded = currents.iter().any(|c| c.exceeds);

    let (l, w, h) = analysis::REFERENCE_CHANNEL;
    let nominal_reference = trace_resistance(l, w, h, constants.resistivity_alloy);
    let report = EstimateReport {
        input: args.common.input.display().to_string(),
        materials,
        resistance_note: format!(
            "resistances are nominal length/area figures; a {l} mm reference channel \
             ({w} x {h} mm) measures about {} ohm vs {:.4} ohm nominal (x{:.2}), \
             and no correction is applied",
            analysis::MEASURED_REFERENCE_RESISTANCE,
            nominal_reference,
            analysis::MEASURED_REFERENCE_RESISTANCE / nominal_reference
        ),
        nets,
        currents,
        warnings: assembly.warnings.clone(),
    };

    match args.common.format {
        FormatArg::Json => print_json(&report)?,
        FormatArg::Table => {
            println!("board: {}", report.input);
            println!(
                "alloy: {:.4} g total ({:.4} mm3), gallium {:.4} g, indium {:.4} g",
                report.materials.alloy_mass,
                report.materials.alloy_volume,
                report.materials.ga_mass,
                report.materials.in_mass
            );
            println!(
                "substrate: {:.4} g upper bound ({:.1} mm3 at fill {:.2})",
                report.materials.substrate_mass,
                report.materials.body_volume,
                report.materials.fill_factor
            );
            for net in &report.nets {
                let connectivity = if net.connected { "connected" } else { "OPEN" };
                print!(
                    "net {} ({}): {} elements, {}",
                    net.name,
                    net.net,
                    net.edges,
                    connectivity
                );
                match &net.end_to_end {
                    Some(e) => println!(", {} .. {}: {:.6} ohm", e.from, e.to, e.nominal_ohms),
                    None => println!(),
                }
            }
            for c in &report.currents {
                match c.warning() {
                    Some(w) => println!("current: {w}"),
                    None => println!(
                        "current: net {} at {} A within the {} A limit",
                        c.name, c.current, c.limit
                    ),
                }
            }
            println!("note: {}", report.resistance_note);
        }
    }
    Ok(if exceeded { 1 } else { 0 })
}

fn load_record(path: &Path) -> Result<InventoryRecord, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Record {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_inventory(args: InventoryArgs) -> Result<i32, CliError> {
    let ours = match &args.record {
        Some(path) => load_record(path)?,
        None => bundled_record(args.bundled),
    };
    let baseline = match &args.baseline_record {
        Some(path) => load_record(path)?,
        None => bundled_record(match args.bundled {
            BundleArg::Pva => BundleArg::Fr4,
            BundleArg::Fr4 => BundleArg::Pva,
        }),
    };
    let factors = args
        .factors
        .as_deref()
        .map(FactorTable::from_path)
        .transpose()?;
    let report = inventory_report(&ours, &baseline, factors.as_ref())?;

    match args.format {
        FormatArg::Json => print_json(&report)?,
        FormatArg::Table => {
            println!("{:<10} {:>12} {:>14}", "side", "mass (g)", "energy (kWh)");
            for side in [&report.ours, &report.baseline] {
                println!(
                    "{:<10} {:>12.4} {:>14.6}",
                    format!("{:?}", side.side).to_lowercase(),
                    side.mass_g,
                    side.energy_kwh
                );
            }
            println!(
                "{:<10} {:>12.4} {:>14.6}",
                "delta", report.mass_delta_g, report.energy_delta_kwh
            );
            if let Some(impacts) = &report.impacts {
                for impact in impacts {
                    println!(
                        "{}: ours {:.6} baseline {:.6} delta {:.6} ({})",
                        impact.indicator,
                        impact.ours,
                        impact.baseline,
                        impact.delta,
                        impact.unit
                    );
                    if !impact.uncovered_ours.is_empty() {
                        println!(
                            "  no factor for: {}",
                            impact.uncovered_ours.join(", ")
                        );
                    }
                    if !impact.uncovered_baseline.is_empty() {
                        println!(
                            "  no factor for (baseline): {}",
                            impact.uncovered_baseline.join(", ")
                        );
                    }
                }
            }
        }
    }
    Ok(0)
}
