//! End-to-end tests driving the `lmpcb` binary against the bundled board
//! fixtures: exit codes, report contents, and output files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use approx::assert_relative_eq;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmpcb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).expect("stdout is JSON")
}

fn sha256_file(path: &Path) -> String {
    let bytes = std::fs::read(path).expect("file readable");
    let mut h = Sha256::new();
    h.update(&bytes);
    format!("{:x}", h.finalize())
}

#[test]
fn inspect_summarizes_the_board() {
    let out = run(&["inspect", fixture("demo_board.kicad_pcb").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("copper layers: 2"));
    assert!(text.contains("nets: 4"));
    assert!(text.contains("footprints: 3"));
}

#[test]
fn inspect_json_reports_geometry() {
    let out = run(&[
        "inspect",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["copper_layers"], 2);
    assert_eq!(v["nets"], 4);
    assert_eq!(v["segments"], 9);
    assert_eq!(v["vias"], 1);
    assert_relative_eq!(v["board_height"].as_f64().unwrap(), 2.3);
    let bbox = v["board_bbox"].as_array().unwrap();
    assert_relative_eq!(bbox[0][0].as_f64().unwrap(), 100.0);
    assert_relative_eq!(bbox[1][0].as_f64().unwrap(), 150.0);
}

#[test]
fn missing_input_is_an_operational_error() {
    let out = run(&["inspect", "/nonexistent/board.kicad_pcb"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn truncated_input_reports_the_parse_line() {
    let out = run(&["inspect", fixture("truncated.kicad_pcb").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unbalanced parenthesis at line"));
}

#[test]
fn drc_passes_the_clean_board() {
    let out = run(&["drc", fixture("demo_board.kicad_pcb").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("clean"));
}

#[test]
fn drc_flags_the_narrow_gap_exactly_once() {
    let out = run(&["drc", fixture("gap_violation.kicad_pcb").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert_eq!(text.matches("TraceClearance").count(), 1);
    assert!(text.contains("measured 0.1000"));
    assert!(text.contains("limit 0.1500"));
}

#[test]
fn drc_json_and_report_file_match() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("drc.json");
    let out = run(&[
        "drc",
        fixture("gap_violation.kicad_pcb").to_str().unwrap(),
        "--format",
        "json",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["clean"], false);
    assert_eq!(v["violations"].as_array().unwrap().len(), 1);
    assert_eq!(v["violations"][0]["rule"], "TraceClearance");
    let file: Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(file["violations"], v["violations"]);
}

#[test]
fn config_file_tightens_the_rules() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"process": {"trace_width_min": 0.8}}"#).unwrap();
    let out = run(&[
        "drc",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    let violations = v["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 9, "every 0.7 mm trace is now too narrow");
    assert!(violations.iter().all(|x| x["rule"] == "TraceWidth"));
}

#[test]
fn out_of_range_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"process": {"insulation_z": -1.0}}"#).unwrap();
    let out = run(&[
        "drc",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("out of range"));
}

#[test]
fn synth_writes_model_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let stl = std::fs::read_to_string(dir.path().join("demo_board.stl")).unwrap();
    assert!(stl.starts_with("solid demo_board\n"));
    assert!(stl.trim_end().ends_with("endsolid demo_board"));

    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("demo_board.manifest.json")).unwrap(),
    )
    .unwrap();
    assert!(manifest["triangles"].as_u64().unwrap() > 0);
    assert_eq!(manifest["copper_layers"], 2);
    assert_relative_eq!(manifest["board_height_mm"].as_f64().unwrap(), 2.3);
    assert_eq!(manifest["violations"].as_array().unwrap().len(), 0);
    assert_eq!(manifest["warnings"].as_array().unwrap().len(), 0);
    let nets = manifest["nets"].as_array().unwrap();
    assert_eq!(nets.len(), 4);
    for net in nets {
        assert!(
            net["outlets"].as_u64().unwrap() >= 1,
            "net {} has no fill outlet",
            net["name"]
        );
    }
    // The printed body is the outline slab minus channels and sockets, so
    // its volume must sit strictly between half the slab and the full slab.
    let slab = 50.0 * 35.0 * 2.3;
    let volume = manifest["mesh_volume_mm3"].as_f64().unwrap();
    assert!(volume > slab / 2.0 && volume < slab);
}

#[test]
fn synth_is_deterministic_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = run(&[
            "synth",
            fixture("demo_board.kicad_pcb").to_str().unwrap(),
            "--mesh-pitch",
            "0.2",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    }
    assert_eq!(
        sha256_file(&a.path().join("demo_board.stl")),
        sha256_file(&b.path().join("demo_board.stl"))
    );
}

#[test]
fn synth_blocks_on_rule_violations_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let gated = run(&[
        "synth",
        fixture("gap_violation.kicad_pcb").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&gated), 1);
    assert!(stderr(&gated).contains("--force"));
    assert!(!dir.path().join("gap_violation.stl").exists());

    let forced = run(&[
        "synth",
        fixture("gap_violation.kicad_pcb").to_str().unwrap(),
        "--mesh-pitch",
        "0.2",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--force",
    ]);
    assert_eq!(code(&forced), 0, "stderr: {}", stderr(&forced));
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("gap_violation.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["violations"].as_array().unwrap().len(), 1);
    let warnings = manifest["warnings"].as_array().unwrap();
    assert!(warnings
        .iter()
        .any(|w| w.as_str().unwrap().contains("no surface outlet")));
}

#[test]
fn synth_rejects_unknown_packages() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        fixture("unknown_package.kicad_pcb").to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no socket package matches"));
}

#[test]
fn synth_rejects_a_pitch_too_coarse_for_the_channels() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--mesh-pitch",
        "0.4",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot resolve"));
}

#[test]
fn synth_binary_stl_has_the_exact_record_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--mesh-pitch",
        "0.2",
        "--stl-mode",
        "binary",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("demo_board.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["stl_mode"], "binary");
    let triangles = manifest["triangles"].as_u64().unwrap();
    let len = std::fs::metadata(dir.path().join("demo_board.stl"))
        .unwrap()
        .len();
    assert_eq!(len, 84 + 50 * triangles);
}

#[test]
fn synth_unwritable_output_is_an_operational_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("taken");
    std::fs::write(&blocker, "not a directory").unwrap();
    let out = run(&[
        "synth",
        fixture("tht_board.kicad_pcb").to_str().unwrap(),
        "--mesh-pitch",
        "0.2",
        "--out-dir",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn synth_honors_a_custom_socket_library() {
    let dir = tempfile::tempdir().unwrap();
    let lib = dir.path().join("sockets.json");
    std::fs::write(
        &lib,
        r#"{"packages": [{"package": "R0805", "aliases": ["R_0805"], "kind": "two_terminal_smd",
            "body": [2.0, 1.25, 0.5], "end_clearance": 0.2, "pins": 2}]}"#,
    )
    .unwrap();
    let out = run(&[
        "synth",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--socket-lib",
        lib.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "library without the chip package must fail");
    assert!(stderr(&out).contains("no socket package matches"));
}

#[test]
fn estimate_masses_follow_channel_volumes() {
    let out = run(&[
        "estimate",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v = json(&out);
    let m = &v["materials"];

    let mut alloy = 0.0;
    for (_, net) in m["per_net"].as_object().unwrap() {
        let volume = net["volume"].as_f64().unwrap();
        let mass = net["mass"].as_f64().unwrap();
        assert_relative_eq!(mass, volume * 6.25e-3, max_relative = 1e-12);
        alloy += mass;
    }
    let alloy_mass = m["alloy_mass"].as_f64().unwrap();
    assert_relative_eq!(alloy_mass, alloy, max_relative = 1e-12);
    let ga = m["ga_mass"].as_f64().unwrap();
    let indium = m["in_mass"].as_f64().unwrap();
    assert_relative_eq!(ga, alloy_mass * 0.755, max_relative = 1e-12);
    assert_relative_eq!(ga + indium, alloy_mass, max_relative = 1e-15);
    assert_relative_eq!(
        m["substrate_mass"].as_f64().unwrap(),
        m["body_volume"].as_f64().unwrap() * 1.23e-3,
        max_relative = 1e-12
    );
}

#[test]
fn estimate_end_to_end_resistances_match_the_layout() {
    let out = run(&[
        "estimate",
        fixture("demo_board.kicad_pcb").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let nets = v["nets"].as_array().unwrap();
    let find = |name: &str| {
        nets.iter()
            .find(|n| n["name"] == name)
            .unwrap_or_else(|| panic!("net {name} missing"))
    };

    let rho = 29.0 * 1e-5; // 29 uohm cm in ohm mm
    let area = 0.7 * 0.7;
    let via = rho * 1.7 / (std::f64::consts::PI * 0.6 * 0.6);

    let vcc = find("VCC");
    assert_eq!(vcc["connected"], true);
    assert_relative_eq!(
        vcc["end_to_end"]["nominal_ohms"].as_f64().unwrap(),
        rho * (4.75 + 4.825) / area,
        max_relative = 1e-9
    );

    let sig = find("SIG");
    assert_relative_eq!(
        sig["end_to_end"]["nominal_ohms"].as_f64().unwrap(),
        rho * (3.595 + 1.525 + 4.0) / area + via,
        max_relative = 1e-9
    );

    let gnd = find("GND");
    assert_relative_eq!(
        gnd["end_to_end"]["nominal_ohms"].as_f64().unwrap(),
        rho * (3.095 + 19.475 + 3.095 + 3.05) / area,
        max_relative = 1e-9
    );

    let tap = find("OUT");
    assert_eq!(tap["connected"], true);
    assert_eq!(tap["terminals"].as_array().unwrap().len(), 1);
    assert!(tap["end_to_end"].is_null());
}

#[test]
fn estimate_gates_on_the_current_limit() {
    let board = fixture("demo_board.kicad_pcb");
    let ok = run(&[
        "estimate",
        board.to_str().unwrap(),
        "--net-current",
        "GND=1",
    ]);
    assert_eq!(code(&ok), 0, "stderr: {}", stderr(&ok));

    let over = run(&[
        "estimate",
        board.to_str().unwrap(),
        "--net-current",
        "GND=6",
        "--format",
        "json",
    ]);
    assert_eq!(code(&over), 1);
    let v = json(&over);
    assert_eq!(v["currents"][0]["exceeds"], true);
    assert_relative_eq!(v["currents"][0]["limit"].as_f64().unwrap(), 5.0);

    let unknown = run(&[
        "estimate",
        board.to_str().unwrap(),
        "--net-current",
        "NOPE=1",
    ]);
    assert_eq!(code(&unknown), 2);
    assert!(stderr(&unknown).contains("unknown net"));
}

#[test]
fn estimate_bridges_layers_through_component_pins() {
    let out = run(&[
        "estimate",
        fixture("tht_board.kicad_pcb").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v = json(&out);
    let net = &v["nets"][0];
    assert_eq!(net["name"], "LOOP");
    assert_eq!(net["connected"], true);
    assert_relative_eq!(
        net["end_to_end"]["nominal_ohms"].as_f64().unwrap(),
        29.0 * 1e-5 * 7.62 / (0.7 * 0.7),
        max_relative = 1e-9
    );
}

#[test]
fn pin_cavities_are_the_outlets_for_through_hole_parts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "synth",
        fixture("tht_board.kicad_pcb").to_str().unwrap(),
        "--mesh-pitch",
        "0.2",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("tht_board.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["socket_cavities"], 8);
    assert_eq!(manifest["nets"][0]["outlets"], 2);
    assert_eq!(manifest["warnings"].as_array().unwrap().len(), 0);
}

#[test]
fn inventory_reports_the_bundled_records() {
    let out = run(&["inventory", "--format", "json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["ours"]["side"], "pva");
    assert_relative_eq!(v["ours"]["mass_g"].as_f64().unwrap(), 2.077, epsilon = 1e-9);
    assert_relative_eq!(
        v["ours"]["energy_kwh"].as_f64().unwrap(),
        3.673e-2,
        epsilon = 1e-12
    );
    assert_eq!(v["baseline"]["side"], "fr4");
    assert_relative_eq!(
        v["baseline"]["mass_g"].as_f64().unwrap(),
        2.856,
        epsilon = 1e-9
    );
    assert_relative_eq!(
        v["baseline"]["energy_kwh"].as_f64().unwrap(),
        7.38e-3,
        epsilon = 1e-12
    );
    assert!(v["impacts"].is_null());
}

#[test]
fn inventory_swaps_sides_on_request() {
    let out = run(&["inventory", "--bundled", "fr4", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["ours"]["side"], "fr4");
    assert_eq!(v["baseline"]["side"], "pva");
}

#[test]
fn inventory_applies_a_factor_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("factors.csv");
    std::fs::write(
        &csv,
        "item,indicator,factor,unit\npva filament,gwp,1.0,kg-eq\n",
    )
    .unwrap();
    let out = run(&["inventory", "--factors", csv.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v = json(&out);
    let impacts = v["impacts"].as_array().unwrap();
    assert_eq!(impacts.len(), 1);
    assert_eq!(impacts[0]["indicator"], "gwp");
    assert_relative_eq!(impacts[0]["ours"].as_f64().unwrap(), 1.17, epsilon = 1e-12);
    assert_relative_eq!(impacts[0]["baseline"].as_f64().unwrap(), 0.0);
    assert!(!impacts[0]["uncovered_ours"].as_array().unwrap().is_empty());
    assert!(!impacts[0]["uncovered_baseline"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn inventory_reads_a_record_file() {
    let dir = tempfile::tempdir().unwrap();
    let record = dir.path().join("record.json");
    std::fs::write(
        &record,
        r#"{"side": "pva", "masses": {"resin": 1.5}, "energies": {"cure": 0.25}}"#,
    )
    .unwrap();
    let out = run(&["inventory", "--record", record.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let v = json(&out);
    assert_relative_eq!(v["ours"]["mass_g"].as_f64().unwrap(), 1.5);
    assert_relative_eq!(v["ours"]["energy_kwh"].as_f64().unwrap(), 0.25);
}

#[test]
fn inventory_rejects_an_unknown_bundle_name() {
    let out = run(&["inventory", "--bundled", "phenolic"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn inventory_rejects_a_malformed_factor_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("factors.csv");
    std::fs::write(&csv, "item,indicator,factor,unit\npva filament,gwp,NaN,kg\n").unwrap();
    let out = run(&["inventory", "--factors", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("row 2"));
}
