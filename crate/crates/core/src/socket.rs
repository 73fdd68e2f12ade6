//! Component package library for socket cavity generation.
//!
//! Package dimensions live in an editable JSON file, not in code. A
//! bundled library covers common chip resistor/capacitor sizes, small
//! SOIC/SOT outlines, and 2.54 mm DIP parts; users point at their own
//! file to extend it. Footprints are matched to packages by the name
//! part of the KiCad `lib_id` (after the `:`), first exactly and then
//! by the longest alias prefix, so `R_0805_2012Metric` finds `R0805`.

use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

/// Environment variable naming a default socket library file. When set,
/// it replaces the bundled library unless a path is given explicitly.
pub const SOCKET_LIB_ENV: &str = "LMPCB_SOCKET_LIB";

#[derive(Debug, Error)]
pub enum SocketError {
    #[error("no socket package matches footprint `{0}`")]
    UnknownPackage(String),
    #[error("package `{package}` expects {expected} pins, footprint has {found}")]
    PinCountMismatch {
        package: String,
        expected: usize,
        found: usize,
    },
    #[error("socket library {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("socket library is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("package `{package}`: {problem}")]
    InvalidSpec { package: String, problem: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SocketKind {
    /// Chip component pressed whole into a single cuboid pocket.
    TwoTerminalSmd,
    /// Body recess plus one pocket per lead.
    LeadedSmd,
    /// Through-hole part; each pin gets a vertical cavity.
    Tht,
}

/// Cavity-generation parameters for one component package.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocketSpec {
    pub package: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    pub kind: SocketKind,
    /// Component body length, width, height in mm.
    pub body: [f64; 3],
    /// Lengthwise fit clearance for two-terminal pockets.
    #[serde(default = "default_end_clearance")]
    pub end_clearance: f64,
    /// Lead pitch in mm, informational for leaded packages.
    #[serde(default)]
    pub pitch: Option<f64>,
    /// Expected pad count; unset accepts any (DIP spans many sizes).
    #[serde(default)]
    pub pins: Option<usize>,
    /// Per-lead pocket length and width for leaded SMD packages.
    #[serde(default)]
    pub pin_pocket: Option<[f64; 2]>,
    /// How deep the body concavity sinks into the board face.
    #[serde(default)]
    pub body_recess_depth: Option<f64>,
    /// Bore diameter of each through-hole pin cavity.
    #[serde(default)]
    pub pin_cavity_diameter: Option<f64>,
    /// Whether pin cavities stop short of the far face.
    #[serde(default = "default_true")]
    pub insertion_side_only: bool,
}

fn default_end_clearance() -> f64 {
    0.2
}

fn default_true() -> bool {
    true
}

impl SocketSpec {
    fn validate(&self) -> Result<(), SocketError> {
        let fail = |problem: String| {
            Err(SocketError::InvalidSpec {
                package: self.package.clone(),
                problem,
            })
        };
        if self.body.iter().any(|&d| d <= 0.0) {
            return fail(format!("body dimensions must be positive, got {:?}", self.body));
        }
        if self.end_clearance < 0.0 {
            return fail(format!("end_clearance must be >= 0, got {}", self.end_clearance));
        }
        match self.kind {
            SocketKind::TwoTerminalSmd => {
                if self.pins.is_some() && self.pins != Some(2) {
                    return fail("two-terminal packages have exactly 2 pins".into());
                }
            }
            SocketKind::LeadedSmd => {
                match self.pin_pocket {
                    None => return fail("leaded packages need pin_pocket".into()),
                    Some(p) if p.iter().any(|&d| d <= 0.0) => {
                        return fail(format!("pin_pocket must be positive, got {p:?}"));
                    }
                    Some(_) => {}
                }
                match self.body_recess_depth {
                    None => return fail("leaded packages need body_recess_depth".into()),
                    Some(d) if d <= 0.0 => {
                        return fail(format!("body_recess_depth must be positive, got {d}"));
                    }
                    Some(_) => {}
                }
            }
            SocketKind::Tht => match self.pin_cavity_diameter {
                None => return fail("through-hole packages need pin_cavity_diameter".into()),
                Some(d) if d <= 0.0 => {
                    return fail(format!("pin_cavity_diameter must be positive, got {d}"));
                }
                Some(_) => {}
            },
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    packages: Vec<SocketSpec>,
}

#[derive(Debug, Clone)]
pub struct SocketLibrary {
    specs: Vec<SocketSpec>,
}

impl SocketLibrary {
    /// The library compiled into the binary.
    pub fn bundled() -> Self {
        static JSON: &str = include_str!("../assets/sockets.json");
        Self::from_json_str(JSON).expect("bundled socket library is valid")
    }

    pub fn from_json_str(json: &str) -> Result<Self, SocketError> {
        let file: LibraryFile = serde_json::from_str(json)?;
        for spec in &file.packages {
            spec.validate()?;
        }
        Ok(Self {
            specs: file.packages,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, SocketError> {
        let json = std::fs::read_to_string(path).map_err(|source| SocketError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&json)
    }

    /// Explicit path, else the `LMPCB_SOCKET_LIB` file, else bundled.
    pub fn load(explicit: Option<&Path>) -> Result<Self, SocketError> {
        if let Some(path) = explicit {
            return Self::from_path(path);
        }
        if let Ok(env_path) = std::env::var(SOCKET_LIB_ENV) {
            return Self::from_path(Path::new(&env_path));
        }
        Ok(Self::bundled())
    }

    pub fn specs(&self) -> &[SocketSpec] {
        &self.specs
    }

    /// Resolves a footprint `lib_id` to a package spec. The name part
    /// after the last `:` is compared case-insensitively: exact package
    /// or alias match first, then the longest alias prefix.
    pub fn lookup(&self, lib_id: &str) -> Result<&SocketSpec, SocketError> {
        let name = lib_id.rsplit(':').next().unwrap_or(lib_id);
        let name_lower = name.to_ascii_lowercase();

        for spec in &self.specs {
            if spec.package.eq_ignore_ascii_case(name)
                || spec.aliases.iter().any(|a| a.eq_ignore_ascii_case(name))
            {
                return Ok(spec);
            }
        }

        let mut best: Option<(usize, &SocketSpec)> = None;
        for spec in &self.specs {
            for alias in std::iter::once(&spec.package).chain(&spec.aliases) {
                let alias_lower = alias.to_ascii_lowercase();
                if name_lower.starts_with(&alias_lower)
                    && best.map_or(true, |(len, _)| alias_lower.len() > len)
                {
                    best = Some((alias_lower.len(), spec));
                }
            }
        }
        best.map(|(_, spec)| spec)
            .ok_or_else(|| SocketError::UnknownPackage(lib_id.to_string()))
    }

    /// Lookup plus the pin-count consistency check.
    pub fn lookup_for_pads(
        &self,
        lib_id: &str,
        pad_count: usize,
    ) -> Result<&SocketSpec, SocketError> {
        let spec = self.lookup(lib_id)?;
        if let Some(expected) = spec.pins {
            if expected != pad_count {
                return Err(SocketError::PinCountMismatch {
                    package: spec.package.clone(),
                    expected,
                    found: pad_count,
                });
            }
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_library_loads() {
        let lib = SocketLibrary::bundled();
        let names: Vec<&str> = lib.specs().iter().map(|s| s.package.as_str()).collect();
        for expected in ["R0603", "R0805", "R1206", "SOIC-8", "SOIC-14", "SOT-23", "DIP-2.54"] {
            assert!(names.contains(&expected), "missing {expected}");
        }
    }

    #[test]
    fn chip_0805_has_reference_dimensions() {
        let lib = SocketLibrary::bundled();
        let spec = lib.lookup("R0805").unwrap();
        assert_eq!(spec.body, [2.0, 1.25, 0.5]);
        assert_eq!(spec.end_clearance, 0.2);
        assert_eq!(spec.kind, SocketKind::TwoTerminalSmd);
    }

    #[test]
    fn lookup_matches_kicad_style_names() {
        let lib = SocketLibrary::bundled();
        let cases = [
            ("Resistor_SMD:R_0805_2012Metric", "R0805"),
            ("Capacitor_SMD:C_0603_1608Metric", "R0603"),
            ("Package_SO:SOIC-8_3.9x4.9mm_P1.27mm", "SOIC-8"),
            ("Package_SO:SOIC-14_3.9x8.7mm_P1.27mm", "SOIC-14"),
            ("Package_TO_SOT_SMD:SOT-23", "SOT-23"),
            ("Package_DIP:DIP-8_W7.62mm", "DIP-2.54"),
            ("Package_DIP:DIP-14_W7.62mm", "DIP-2.54"),
            ("Test:R0805", "R0805"),
        ];
        for (lib_id, package) in cases {
            assert_eq!(lib.lookup(lib_id).unwrap().package, package, "{lib_id}");
        }
    }

    #[test]
    fn unknown_package_reports_full_lib_id() {
        let lib = SocketLibrary::bundled();
        let err = lib.lookup("Connector:XYZ-UNKNOWN").unwrap_err();
        match err {
            SocketError::UnknownPackage(id) => assert_eq!(id, "Connector:XYZ-UNKNOWN"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn pin_count_mismatch_is_reported() {
        let lib = SocketLibrary::bundled();
        let err = lib
            .lookup_for_pads("Package_SO:SOIC-8_3.9x4.9mm_P1.27mm", 7)
            .unwrap_err();
        match err {
            SocketError::PinCountMismatch {
                package,
                expected,
                found,
            } => {
                assert_eq!(package, "SOIC-8");
                assert_eq!(expected, 8);
                assert_eq!(found, 7);
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(lib.lookup_for_pads("Package_DIP:DIP-8_W7.62mm", 8).is_ok());
        assert!(lib.lookup_for_pads("Package_DIP:DIP-14_W7.62mm", 14).is_ok());
    }

    #[test]
    fn longest_alias_prefix_wins() {
        let json = r#"{
            "packages": [
                {"package": "GEN", "aliases": ["SOIC"], "kind": "two_terminal_smd",
                 "body": [1.0, 1.0, 1.0], "pins": 2},
                {"package": "SPECIFIC", "aliases": ["SOIC-8"], "kind": "two_terminal_smd",
                 "body": [2.0, 2.0, 2.0], "pins": 2}
            ]
        }"#;
        let lib = SocketLibrary::from_json_str(json).unwrap();
        assert_eq!(lib.lookup("SOIC-8_wide").unwrap().package, "SPECIFIC");
        assert_eq!(lib.lookup("SOIC-X").unwrap().package, "GEN");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad_dim = r#"{"packages": [{"package": "X", "kind": "two_terminal_smd",
            "body": [0.0, 1.0, 1.0]}]}"#;
        assert!(matches!(
            SocketLibrary::from_json_str(bad_dim),
            Err(SocketError::InvalidSpec { .. })
        ));

        let missing_pocket = r#"{"packages": [{"package": "X", "kind": "leaded_smd",
            "body": [1.0, 1.0, 1.0], "body_recess_depth": 0.5}]}"#;
        assert!(matches!(
            SocketLibrary::from_json_str(missing_pocket),
            Err(SocketError::InvalidSpec { .. })
        ));

        let missing_bore = r#"{"packages": [{"package": "X", "kind": "tht",
            "body": [1.0, 1.0, 1.0]}]}"#;
        assert!(matches!(
            SocketLibrary::from_json_str(missing_bore),
            Err(SocketError::InvalidSpec { .. })
        ));

        let unknown_field = r#"{"packages": [{"package": "X", "kind": "tht",
            "body": [1.0, 1.0, 1.0], "pin_cavity_diameter": 1.0, "bogus": 3}]}"#;
        assert!(matches!(
            SocketLibrary::from_json_str(unknown_field),
            Err(SocketError::Parse(_))
        ));

        assert!(matches!(
            SocketLibrary::from_json_str("not json"),
            Err(SocketError::Parse(_))
        ));
    }

    #[test]
    fn library_loads_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lib.json");
        std::fs::write(
            &path,
            r#"{"packages": [{"package": "CUSTOM", "kind": "two_terminal_smd",
                "body": [5.0, 2.0, 1.0], "pins": 2}]}"#,
        )
        .unwrap();
        let lib = SocketLibrary::from_path(&path).unwrap();
        assert_eq!(lib.lookup("CUSTOM").unwrap().end_clearance, 0.2);

        let err = SocketLibrary::from_path(&dir.path().join("absent.json")).unwrap_err();
        assert!(matches!(err, SocketError::Io { .. }));
    }
}
