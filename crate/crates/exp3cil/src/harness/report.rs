//! Cross-method comparison tables and plot-ready accuracy curves.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::run::{mean_std, MeanStd, RunSummary};

/// One method's row: TFH, TFS, and their per-seed average, each mean +- std
/// over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub tfh: Option<MeanStd>,
    pub tfs: Option<MeanStd>,
    pub avg: Option<MeanStd>,
}

/// Seed-averaged per-phase accuracy for one method and setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub method: String,
    pub setting: String,
    pub phase: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub curves: Vec<CurvePoint>,
}

/// Flat CSV mirror of [`ComparisonRow`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ComparisonCsvRow {
    method: String,
    tfh_mean: Option<f64>,
    tfh_std: Option<f64>,
    tfs_mean: Option<f64>,
    tfs_std: Option<f64>,
    avg_mean: Option<f64>,
    avg_std: Option<f64>,
}

fn provenance_key(summary: &RunSummary) -> Result<String> {
    let c = &summary.config;
    Ok(serde_json::to_string(&(
        &c.dataset,
        &c.schedule,
        &c.orchestrator,
        &c.arch,
        &c.seeds,
        &c.settings,
    ))?)
}

/// Build the methods-by-settings comparison from individual run summaries.
///
/// All summaries must share dataset, schedule, orchestrator, architecture,
/// seeds, and settings; methods and grids may differ.
pub fn compare_report(summaries: &[RunSummary]) -> Result<ComparisonReport> {
    let first = summaries
        .first()
        .ok_or_else(|| Error::Provenance("no summaries to compare".into()))?;
    let reference = provenance_key(first)?;
    for s in &summaries[1..] {
        if provenance_key(s)? != reference {
            return Err(Error::Provenance(format!(
                "summary for '{}' was produced under a different dataset/schedule/config than '{}'",
                s.method, first.method
            )));
        }
    }

    let mut rows = Vec::with_capacity(summaries.len());
    let mut curves = Vec::new();
    for summary in summaries {
        let stat_of = |key: &str| -> Option<MeanStd> {
            summary.settings.get(key).map(|s| MeanStd {
                mean: s.mean_average_accuracy,
                std: s.std_average_accuracy,
            })
        };
        rows.push(ComparisonRow {
            method: summary.method.clone(),
            tfh: stat_of("tfh"),
            tfs: stat_of("tfs"),
            avg: summary.average,
        });

        for (setting, stats) in &summary.settings {
            let phases = stats
                .per_seed
                .first()
                .map(|s| s.phase_accuracies.len())
                .unwrap_or(0);
            for phase in 0..phases {
                let at_phase: Vec<f64> = stats
                    .per_seed
                    .iter()
                    .map(|s| s.phase_accuracies[phase])
                    .collect();
                let ms = mean_std(&at_phase);
                curves.push(CurvePoint {
                    method: summary.method.clone(),
                    setting: setting.clone(),
                    phase,
                    mean_accuracy: ms.mean,
                    std_accuracy: ms.std,
                });
            }
        }
    }
    Ok(ComparisonReport { rows, curves })
}

impl ComparisonReport {
    /// The comparison table as CSV.
    pub fn table_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(ComparisonCsvRow {
                method: row.method.clone(),
                tfh_mean: row.tfh.map(|m| m.mean),
                tfh_std: row.tfh.map(|m| m.std),
                tfs_mean: row.tfs.map(|m| m.mean),
                tfs_std: row.tfs.map(|m| m.std),
                avg_mean: row.avg.map(|m| m.mean),
                avg_std: row.avg.map(|m| m.std),
            })?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Config(format!("csv flush failed: {e}")))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// Per-phase accuracy curves as CSV.
    pub fn curves_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for point in &self.curves {
            writer.serialize(point)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Config(format!("csv flush failed: {e}")))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    /// Write `comparison.json`, `comparison.csv`, and `curves.csv`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        std::fs::write(dir.join("comparison.json"), json)?;
        std::fs::write(dir.join("comparison.csv"), self.table_csv()?)?;
        std::fs::write(dir.join("curves.csv"), self.curves_csv()?)?;
        Ok(())
    }
}
