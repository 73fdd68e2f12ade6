//! Print-process limits and the vertical stackup.
//!
//! All printable-feature minima live here. Channels narrower or shorter
//! than one nozzle track do not form reliable walls, so the governing
//! dimension is the nozzle. The defaults describe a 0.2 mm nozzle printing
//! 0.7 x 0.7 mm channels with 0.15 mm walls and 0.3 mm insulation floors;
//! the 0.18 mm insulation floor (three 0.06 mm print layers) is the hard
//! minimum that still isolates crossing channels.
//!
//! The board is a sandwich: an insulation slab below and above every trace
//! layer. For `L` copper layers of height `h` and insulation thickness `t`
//! the body is `(L+1)*t + L*h` tall, and trace layer `k` (bottom-up)
//! occupies `z in [(k+1)*t + k*h, (k+1)*t + (k+1)*h]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("{field} = {value} is below the process minimum {limit}")]
    ParamBelowMinimum {
        field: &'static str,
        limit: f64,
        value: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Nozzle {
    #[serde(rename = "0.2mm")]
    Mm02,
    #[serde(rename = "0.4mm")]
    Mm04,
}

impl Nozzle {
    pub fn diameter(self) -> f64 {
        match self {
            Nozzle::Mm02 => 0.2,
            Nozzle::Mm04 => 0.4,
        }
    }

    /// Smallest printable channel width and height for this nozzle.
    pub fn min_trace_dim(self) -> f64 {
        match self {
            Nozzle::Mm02 => 0.7,
            Nozzle::Mm04 => 0.9,
        }
    }
}

/// Fabrication limits and stackup inputs, all lengths in millimeters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessParams {
    /// Minimum channel width; also the minimum accepted trace width.
    pub trace_width_min: f64,
    /// Channel height, one value for the whole board.
    pub trace_height: f64,
    /// Insulation slab thickness between and around trace layers.
    pub insulation_z: f64,
    /// Minimum PVA wall between adjacent channels.
    pub wall_xy_min: f64,
    /// Minimum via bore diameter.
    pub via_diameter: f64,
    /// Minimum center-to-center pad spacing; equals
    /// `trace_width_min + wall_xy_min` by construction.
    pub pad_pitch_min: f64,
    /// Gap left at each end of a press-fit component pocket.
    pub end_clearance: f64,
    pub nozzle: Nozzle,
    /// Maximum continuous current per channel, amperes (inclusive).
    pub max_current: f64,
    /// Advisory signal bandwidth, hertz. Reported, never enforced.
    pub max_signal_freq: f64,
}

impl Default for ProcessParams {
    fn default() -> Self {
        ProcessParams {
            trace_width_min: 0.7,
            trace_height: 0.7,
            insulation_z: 0.3,
            wall_xy_min: 0.15,
            via_diameter: 1.2,
            pad_pitch_min: 0.85,
            end_clearance: 0.2,
            nozzle: Nozzle::Mm02,
            max_current: 5.0,
            max_signal_freq: 10.0e6,
        }
    }
}

/// Per-field overrides as read from a configuration file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessOverrides {
    pub trace_width_min: Option<f64>,
    pub trace_height: Option<f64>,
    pub insulation_z: Option<f64>,
    pub wall_xy_min: Option<f64>,
    pub via_diameter: Option<f64>,
    pub pad_pitch_min: Option<f64>,
    pub end_clearance: Option<f64>,
    pub nozzle: Option<Nozzle>,
    pub max_current: Option<f64>,
    pub max_signal_freq: Option<f64>,
}

impl ProcessOverrides {
    /// Applies the overrides on top of `base`. `pad_pitch_min` follows the
    /// overridden width and wall unless pinned explicitly.
    pub fn apply(&self, base: &ProcessParams) -> ProcessParams {
        let mut p = base.clone();
        if let Some(v) = self.trace_width_min {
            p.trace_width_min = v;
        }
        if let Some(v) = self.trace_height {
            p.trace_height = v;
        }
        if let Some(v) = self.insulation_z {
            p.insulation_z = v;
        }
        if let Some(v) = self.wall_xy_min {
            p.wall_xy_min = v;
        }
        if let Some(v) = self.via_diameter {
            p.via_diameter = v;
        }
        if let Some(v) = self.end_clearance {
            p.end_clearance = v;
        }
        if let Some(v) = self.nozzle {
            p.nozzle = v;
        }
        if let Some(v) = self.max_current {
            p.max_current = v;
        }
        if let Some(v) = self.max_signal_freq {
            p.max_signal_freq = v;
        }
        p.pad_pitch_min = self
            .pad_pitch_min
            .unwrap_or(p.trace_width_min + p.wall_xy_min);
        p
    }
}

/// One parameter outside its printable range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamViolation {
    pub field: &'static str,
    pub limit: f64,
    pub value: f64,
}

impl std::fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} = {} violates the process limit {}",
            self.field, self.value, self.limit
        )
    }
}

/// Smallest via bore that fills reliably, regardless of nozzle.
pub const VIA_DIAMETER_FLOOR: f64 = 1.2;

/// Checks every parameter against the limits for the selected nozzle.
/// Returns all violations rather than stopping at the first.
pub fn validate_params(p: &ProcessParams) -> Vec<ParamViolation> {
    let mut out = Vec::new();
    let mut check_min = |field: &'static str, value: f64, limit: f64| {
        if value < limit {
            out.push(ParamViolation {
                field,
                limit,
                value,
            });
        }
    };
    let trace_min = p.nozzle.min_trace_dim();
    check_min("trace_width_min", p.trace_width_min, trace_min);
    check_min("trace_height", p.trace_height, trace_min);
    check_min("insulation_z", p.insulation_z, 0.18);
    check_min("wall_xy_min", p.wall_xy_min, 0.15);
    check_min("via_diameter", p.via_diameter, VIA_DIAMETER_FLOOR);
    check_min("end_clearance", p.end_clearance, 0.0);
    check_min("max_current", p.max_current, 0.0);

    let derived_pitch = p.trace_width_min + p.wall_xy_min;
    if (p.pad_pitch_min - derived_pitch).abs() > 1e-9 {
        out.push(ParamViolation {
            field: "pad_pitch_min",
            limit: derived_pitch,
            value: p.pad_pitch_min,
        });
    }
    out
}

/// Total body thickness for `copper_layers` trace layers.
pub fn board_height(
    copper_layers: usize,
    insulation_z: f64,
    trace_height: f64,
) -> Result<f64, ProcessError> {
    if copper_layers < 1 {
        return Err(ProcessError::ParamBelowMinimum {
            field: "copper_layers",
            limit: 1.0,
            value: copper_layers as f64,
        });
    }
    if insulation_z < 0.18 {
        return Err(ProcessError::ParamBelowMinimum {
            field: "insulation_z",
            limit: 0.18,
            value: insulation_z,
        });
    }
    if trace_height < 0.7 {
        return Err(ProcessError::ParamBelowMinimum {
            field: "trace_height",
            limit: 0.7,
            value: trace_height,
        });
    }
    Ok((copper_layers as f64 + 1.0) * insulation_z + copper_layers as f64 * trace_height)
}

/// Resolved vertical geometry of the printed body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stackup {
    pub copper_layers: usize,
    pub insulation_z: f64,
    pub trace_height: f64,
    pub board_height: f64,
    /// `(z_bottom, z_top)` of each trace layer, bottom-up.
    pub layer_z: Vec<(f64, f64)>,
}

impl Stackup {
    pub fn new(copper_layers: usize, params: &ProcessParams) -> Result<Stackup, ProcessError> {
        let t = params.insulation_z;
        let h = params.trace_height;
        if h < params.nozzle.min_trace_dim() {
            return Err(ProcessError::ParamBelowMinimum {
                field: "trace_height",
                limit: params.nozzle.min_trace_dim(),
                value: h,
            });
        }
        let board_height = board_height(copper_layers, t, h)?;
        let layer_z = (0..copper_layers)
            .map(|k| {
                let k = k as f64;
                ((k + 1.0) * t + k * h, (k + 1.0) * t + (k + 1.0) * h)
            })
            .collect();
        Ok(Stackup {
            copper_layers,
            insulation_z: t,
            trace_height: h,
            board_height,
            layer_z,
        })
    }

    /// Z range of trace layer `k`, counted from the bottom.
    pub fn layer_z_range(&self, k: usize) -> (f64, f64) {
        self.layer_z[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn defaults_validate_clean() {
        assert!(validate_params(&ProcessParams::default()).is_empty());
    }

    #[test]
    fn thin_insulation_cites_the_limit() {
        let p = ProcessParams {
            insulation_z: 0.12,
            ..ProcessParams::default()
        };
        let v = validate_params(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "insulation_z");
        assert_eq!(v[0].limit, 0.18);
        assert_eq!(v[0].value, 0.12);
    }

    #[test]
    fn wide_nozzle_raises_trace_minima() {
        let p = ProcessParams {
            nozzle: Nozzle::Mm04,
            ..ProcessParams::default()
        };
        let v = validate_params(&p);
        let fields: Vec<&str> = v.iter().map(|x| x.field).collect();
        assert!(fields.contains(&"trace_width_min"));
        assert!(fields.contains(&"trace_height"));
        assert!(v.iter().all(|x| x.limit == 0.9 || x.field == "pad_pitch_min"));

        let ok = ProcessParams {
            nozzle: Nozzle::Mm04,
            trace_width_min: 0.9,
            trace_height: 0.9,
            pad_pitch_min: 0.9 + 0.15,
            ..ProcessParams::default()
        };
        assert!(validate_params(&ok).is_empty());
    }

    #[test]
    fn undersized_via_is_flagged() {
        let p = ProcessParams {
            via_diameter: 1.0,
            ..ProcessParams::default()
        };
        let v = validate_params(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "via_diameter");
        assert_eq!(v[0].limit, 1.2);
    }

    #[test]
    fn pad_pitch_must_equal_width_plus_wall() {
        let p = ProcessParams {
            pad_pitch_min: 1.0,
            ..ProcessParams::default()
        };
        let v = validate_params(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "pad_pitch_min");
        assert_relative_eq!(v[0].limit, 0.85);
    }

    #[test]
    fn board_height_matches_reference_stackups() {
        assert_relative_eq!(board_height(2, 0.3, 0.7).unwrap(), 2.3, epsilon = 1e-9);
        assert_relative_eq!(board_height(1, 0.18, 0.7).unwrap(), 1.06, epsilon = 1e-9);
        assert_relative_eq!(board_height(2, 0.18, 0.7).unwrap(), 1.94, epsilon = 1e-9);
    }

    #[test]
    fn board_height_rejects_out_of_range_inputs() {
        assert!(matches!(
            board_height(0, 0.3, 0.7),
            Err(ProcessError::ParamBelowMinimum { field: "copper_layers", .. })
        ));
        assert!(matches!(
            board_height(2, 0.1, 0.7),
            Err(ProcessError::ParamBelowMinimum { field: "insulation_z", .. })
        ));
        assert!(matches!(
            board_height(2, 0.3, 0.5),
            Err(ProcessError::ParamBelowMinimum { field: "trace_height", .. })
        ));
    }

    #[test]
    fn two_layer_ranges_match_hand_stackup() {
        let stackup = Stackup::new(2, &ProcessParams::default()).unwrap();
        assert_eq!(stackup.layer_z.len(), 2);
        let (z0, z1) = stackup.layer_z_range(0);
        assert_relative_eq!(z0, 0.3, epsilon = 1e-12);
        assert_relative_eq!(z1, 1.0, epsilon = 1e-12);
        let (z0, z1) = stackup.layer_z_range(1);
        assert_relative_eq!(z0, 1.3, epsilon = 1e-12);
        assert_relative_eq!(z1, 2.0, epsilon = 1e-12);
        assert_relative_eq!(stackup.board_height, 2.3, epsilon = 1e-9);
    }

    /// Walks the stackup slab by slab and records each trace layer's range.
    /// This reproduces the closed-form ranges without sharing any code
    /// with them.
    fn layer_ranges_by_walking(copper_layers: usize, t: f64, h: f64) -> (Vec<(f64, f64)>, f64) {
        let mut z = 0.0;
        let mut ranges = Vec::new();
        for _ in 0..copper_layers {
            z += t;
            let z0 = z;
            z += h;
            ranges.push((z0, z));
        }
        z += t;
        (ranges, z)
    }

    #[test]
    fn closed_form_matches_slab_walk() {
        for layers in 1..=6 {
            for &(t, h) in &[(0.3, 0.7), (0.18, 0.7), (0.25, 0.9), (1.0, 2.5)] {
                let p = ProcessParams {
                    insulation_z: t,
                    trace_height: h,
                    trace_width_min: h.min(0.7),
                    pad_pitch_min: h.min(0.7) + 0.15,
                    ..ProcessParams::default()
                };
                let stackup = Stackup::new(layers, &p).unwrap();
                let (walked, total) = layer_ranges_by_walking(layers, t, h);
                assert_relative_eq!(stackup.board_height, total, max_relative = 1e-12);
                for (a, b) in stackup.layer_z.iter().zip(&walked) {
                    assert_relative_eq!(a.0, b.0, max_relative = 1e-12);
                    assert_relative_eq!(a.1, b.1, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn extents_plus_insulation_equal_height() {
        for layers in 1..=5 {
            let stackup = Stackup::new(layers, &ProcessParams::default()).unwrap();
            let extents: f64 = stackup.layer_z.iter().map(|(z0, z1)| z1 - z0).sum();
            let total = extents + (layers as f64 + 1.0) * stackup.insulation_z;
            assert_relative_eq!(total, stackup.board_height, max_relative = 1e-12);
        }
    }

    #[test]
    fn overrides_recompute_pad_pitch() {
        let over: ProcessOverrides =
            serde_json::from_str(r#"{"trace_width_min": 0.9, "trace_height": 0.9}"#).unwrap();
        let p = over.apply(&ProcessParams::default());
        assert_relative_eq!(p.pad_pitch_min, 1.05);
        assert!(validate_params(&p).is_empty());

        let pinned: ProcessOverrides =
            serde_json::from_str(r#"{"pad_pitch_min": 0.9}"#).unwrap();
        let p = pinned.apply(&ProcessParams::default());
        assert_eq!(p.pad_pitch_min, 0.9);
        assert_eq!(validate_params(&p).len(), 1);
    }

    #[test]
    fn nozzle_names_round_trip_through_json() {
        let p: ProcessOverrides = serde_json::from_str(r#"{"nozzle": "0.4mm"}"#).unwrap();
        assert_eq!(p.nozzle, Some(Nozzle::Mm04));
        assert!(serde_json::from_str::<ProcessOverrides>(r#"{"nozzle": "0.3mm"}"#).is_err());
    }
}
