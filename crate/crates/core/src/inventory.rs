//! Cradle-to-gate inventory accounting: material masses and process-step
//! energies for a board, compared against a conventional baseline.
//!
//! Two reference records are bundled, measured on the same small two-layer
//! demonstration board: the printed PVA route and a conventional FR-4
//! build. The report sums masses and energies per side and their deltas.
//! Impact indicators (global warming potential and the like) need
//! characterization factors that depend on regional datasets; they are
//! computed only from a user-supplied factor table and never invented.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InventoryError {
    #[error("negative quantity for `{item}`: {value}")]
    NegativeQuantity { item: String, value: f64 },
    #[error("cannot read factor table {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("factor table: {0}")]
    Csv(#[from] csv::Error),
    #[error("factor table row {row}: {problem}")]
    BadFactor { row: usize, problem: String },
}

/// Which fabrication route a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessSide {
    Pva,
    Fr4,
}

/// Bill of materials and per-step energies for one fabrication route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryRecord {
    pub side: ProcessSide,
    /// Item name to grams.
    pub masses: BTreeMap<String, f64>,
    /// Process step to kWh.
    pub energies: BTreeMap<String, f64>,
}

fn grams(items: &[(&str, f64)]) -> BTreeMap<String, f64> {
    items.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

impl InventoryRecord {
    /// Printed-route reference record for the demonstration board.
    pub fn bundled_pva() -> InventoryRecord {
        InventoryRecord {
            side: ProcessSide::Pva,
            masses: grams(&[
                ("pva filament", 1.17),
                ("pva pellets", 0.013),
                ("water", 0.026),
                ("gallium", 0.651),
                ("indium", 0.217),
            ]),
            energies: grams(&[
                ("filament drying", 4.37e-3),
                ("glue preparation", 1.52e-4),
                ("alloy synthesis", 5.208e-3),
                ("3d printing", 2.7e-2),
            ]),
        }
    }

    /// Conventional-route reference record for the same board.
    pub fn bundled_fr4() -> InventoryRecord {
        InventoryRecord {
            side: ProcessSide::Fr4,
            masses: grams(&[("fr-4", 2.228), ("solder paste", 0.628)]),
            energies: grams(&[("soldering", 7.0e-4), ("cnc milling", 6.68e-3)]),
        }
    }

    pub fn mass_total(&self) -> f64 {
        self.masses.values().sum()
    }

    pub fn energy_total(&self) -> f64 {
        self.energies.values().sum()
    }

    fn validate(&self) -> Result<(), InventoryError> {
        for (item, &value) in self.masses.iter().chain(&self.energies) {
            if value < 0.0 || !value.is_finite() {
                return Err(InventoryError::NegativeQuantity {
                    item: item.clone(),
                    value,
                });
            }
        }
        Ok(())
    }
}

/// One characterization factor: kg-equivalents of `indicator` per gram of
/// a mass item or per kWh of an energy step named `item`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactFactor {
    pub item: String,
    pub indicator: String,
    pub factor: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FactorTable {
    pub factors: Vec<ImpactFactor>,
}

impl FactorTable {
    /// Reads a CSV with the columns `item, indicator, factor, unit`.
    pub fn from_reader(r: impl std::io::Read) -> Result<FactorTable, InventoryError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let mut factors = Vec::new();
        for (i, row) in reader.deserialize::<ImpactFactor>().enumerate() {
            let f = row?;
            let row = i + 2; // header is line 1
            if f.item.is_empty() || f.indicator.is_empty() {
                return Err(InventoryError::BadFactor {
                    row,
                    problem: "empty item or indicator".into(),
                });
            }
            if !f.factor.is_finite() {
                return Err(InventoryError::BadFactor {
                    row,
                    problem: format!("factor {} is not finite", f.factor),
                });
            }
            factors.push(f);
        }
        Ok(FactorTable { factors })
    }

    pub fn from_path(path: &Path) -> Result<FactorTable, InventoryError> {
        let file = std::fs::File::open(path).map_err(|source| InventoryError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        FactorTable::from_reader(file)
    }

    fn lookup(&self, item: &str, indicator: &str) -> Option<f64> {
        self.factors
            .iter()
            .find(|f| f.item == item && f.indicator == indicator)
            .map(|f| f.factor)
    }

    /// Distinct indicators with their units, in name order.
    fn indicators(&self) -> Vec<(String, String)> {
        let mut seen = BTreeMap::new();
        for f in &self.factors {
            seen.entry(f.indicator.clone()).or_insert_with(|| f.unit.clone());
        }
        seen.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideTotals {
    pub side: ProcessSide,
    pub mass_g: f64,
    pub energy_kwh: f64,
}

/// Impact sum for one indicator. Items lacking a factor contribute
/// nothing and are listed so the gap is visible.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactSum {
    pub indicator: String,
    pub unit: String,
    pub ours: f64,
    pub baseline: f64,
    /// `ours - baseline`; negative means the printed route scores lower.
    pub delta: f64,
    pub uncovered_ours: Vec<String>,
    pub uncovered_baseline: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InventoryReport {
    pub ours: SideTotals,
    pub baseline: SideTotals,
    /// `ours - baseline` for mass and energy.
    pub mass_delta_g: f64,
    pub energy_delta_kwh: f64,
    /// Present only when a factor table was supplied.
    pub impacts: Option<Vec<ImpactSum>>,
}

fn impact_for(
    record: &InventoryRecord,
    table: &FactorTable,
    indicator: &str,
) -> (f64, Vec<String>) {
    let mut sum = 0.0;
    let mut uncovered = Vec::new();
    for (item, &quantity) in record.masses.iter().chain(&record.energies) {
        match table.lookup(item, indicator) {
            Some(factor) => sum += quantity * factor,
            None => uncovered.push(item.clone()),
        }
    }
    (sum, uncovered)
}

/// Totals, deltas, and (with a factor table) per-indicator impact sums
/// for one record against a baseline.
pub fn inventory_report(
    ours: &InventoryRecord,
    baseline: &InventoryRecord,
    factors: Option<&FactorTable>,
) -> Result<InventoryReport, InventoryError> {
    ours.validate()?;
    baseline.validate()?;
    let totals = |r: &InventoryRecord| SideTotals {
        side: r.side,
        mass_g: r.mass_total(),
        energy_kwh: r.energy_total(),
    };
    let impacts = factors.map(|table| {
        table
            .indicators()
            .into_iter()
            .map(|(indicator, unit)| {
                let (ours_sum, uncovered_ours) = impact_for(ours, table, &indicator);
                let (base_sum, uncovered_baseline) = impact_for(baseline, table, &indicator);
                ImpactSum {
                    indicator,
                    unit,
                    ours: ours_sum,
                    baseline: base_sum,
                    delta: ours_sum - base_sum,
                    uncovered_ours,
                    uncovered_baseline,
                }
            })
            .collect()
    });
    Ok(InventoryReport {
        ours: totals(ours),
        baseline: totals(baseline),
        mass_delta_g: ours.mass_total() - baseline.mass_total(),
        energy_delta_kwh: ours.energy_total() - baseline.energy_total(),
        impacts,
    })
}
