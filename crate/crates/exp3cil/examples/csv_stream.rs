//! Running the experiment harness on a CSV dataset.
//!
//! Rows are `label,v1,...,vdim` with no header. The harness splits the flat
//! files into per-phase sets according to the schedule, so small real
//! datasets drop in without code changes. This example synthesizes the CSVs
//! first, then runs a short fixed-action experiment from a config built in
//! code (the same shape as the TOML files the CLI reads).
//!
//! ```bash
//! cargo run --release --example csv_stream
//! ```

use std::fmt::Write as _;

use exp3cil::datastream::{load_csv, make_schedule, synth_generate, Setting};
use exp3cil::harness::{execute, resolve, DatasetKind, FileConfig, Overrides};

fn main() -> exp3cil::Result<()> {
    let dir = tempfile::tempdir().expect("tempdir");
    let dim = 8;
    let classes = 6;

    // Materialize a synthetic stream as flat CSV files.
    let schedule = make_schedule(classes, 2, Setting::Tfs)?;
    let (train_sets, test_sets) = synth_generate(&schedule, 12, 6, dim, 5.0, 21)?;
    let to_csv = |sets: &[exp3cil::datastream::LabeledDataset]| {
        let mut text = String::new();
        for set in sets {
            for sample in set.iter() {
                let values: Vec<String> =
                    sample.features.iter().map(ToString::to_string).collect();
                writeln!(text, "{},{}", sample.label, values.join(",")).unwrap();
            }
        }
        text
    };
    let train_path = dir.path().join("train.csv");
    let test_path = dir.path().join("test.csv");
    std::fs::write(&train_path, to_csv(&train_sets)).expect("write train csv");
    std::fs::write(&test_path, to_csv(&test_sets)).expect("write test csv");

    let loaded = load_csv(&train_path, dim)?;
    println!(
        "loaded {} training samples over classes {:?}",
        loaded.len(),
        loaded.classes()
    );

    // Point the harness at the files.
    let mut file = FileConfig::default();
    file.dataset.kind = DatasetKind::Csv;
    file.dataset.classes = classes;
    file.dataset.dim = dim;
    file.dataset.train_path = Some(train_path.display().to_string());
    file.dataset.test_path = Some(test_path.display().to_string());
    file.schedule.phases = 2;
    file.schedule.setting = "tfs".into();
    file.orchestrator.m2_epochs = 10;
    file.orchestrator.batch_size = 4;
    file.orchestrator.exemplar_budget = 3;
    file.model.hidden_dim = 16;
    file.model.feature_dim = 6;
    file.run.seeds = vec![1];

    let overrides = Overrides {
        mode: Some("fixed".into()),
        beta: Some(1.0),
        gamma: Some(0.0),
        lambda: Some(0.05),
        delta: Some(1),
        ..Overrides::default()
    };
    let artifacts = execute(&resolve(&file, &overrides)?)?;
    for row in &artifacts.phase_rows {
        println!(
            "{} seed {} phase {}: accuracy {:.4}",
            row.setting, row.seed, row.phase, row.accuracy
        );
    }
    Ok(())
}
