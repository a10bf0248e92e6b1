//! Experiment matrix execution and machine-readable outputs.
//!
//! A run expands to (settings x seeds) cells — plus one layer of candidate
//! actions in grid-search mode. Cells are independent: each derives its
//! dataset and experiment seeds from the run seed alone, so the matrix can
//! execute on any number of worker threads and still aggregate to identical
//! results (cells are sorted before writing).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datastream::{
    load_csv, make_schedule_ordered, synth_generate, LabeledDataset, PhaseSchedule, Setting,
};
use crate::error::{Error, Result};
use crate::harness::config::{ablation_grid, DatasetKind, Mode, ResolvedConfig};
use crate::hyperspace::{Action, ActionSpace};
use crate::orchestrator::{run_experiment, ActionSelection, ExperimentOutcome};
use crate::seeding::{child_seed, TAG_DATA, TAG_EXPERIMENT};

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

pub fn mean_std(xs: &[f64]) -> MeanStd {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    MeanStd {
        mean,
        std: var.sqrt(),
    }
}

/// One seed's run within one setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedStats {
    pub seed: u64,
    pub phase_accuracies: Vec<f64>,
    pub average_accuracy: f64,
}

/// All seeds of one setting, with aggregate statistics recomputable from the
/// embedded raw values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingStats {
    pub per_seed: Vec<SeedStats>,
    pub mean_average_accuracy: f64,
    pub std_average_accuracy: f64,
}

/// One candidate's score in a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub index: usize,
    pub action: Action,
    /// Mean average accuracy over settings and seeds.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchReport {
    pub candidates: Vec<CandidateScore>,
    pub best_index: usize,
    pub best_action: Action,
}

/// The run's summary document (`summary.json`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: String,
    /// Full provenance: the resolved configuration this run executed.
    pub config: ResolvedConfig,
    /// The resolved action list the method chose from.
    pub actions: Vec<Action>,
    /// Keyed "tfh" / "tfs".
    pub settings: BTreeMap<String, SettingStats>,
    /// Per-seed mean of the TFH and TFS averages, when both settings ran.
    pub average: Option<MeanStd>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_search: Option<GridSearchReport>,
    pub elapsed_seconds: f64,
}

/// One row of `phases.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub method: String,
    pub setting: String,
    pub seed: u64,
    pub phase: usize,
    pub accuracy: f64,
    pub chosen_beta: f64,
    pub chosen_gamma: f64,
    pub chosen_lambda: f64,
    pub chosen_delta: u8,
}

/// One row of `trace.csv`: a single policy-learning iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub method: String,
    pub setting: String,
    pub seed: u64,
    pub phase: usize,
    pub iteration: usize,
    pub action_index: usize,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: u8,
    pub probability: f64,
    pub reward: f64,
    pub cumulative_reward: f64,
}

/// Everything a run produces in memory.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub summary: RunSummary,
    pub phase_rows: Vec<PhaseRow>,
    pub trace_rows: Vec<TraceRow>,
}

pub fn fixed_method_label(action: &Action) -> String {
    format!(
        "fixed[beta={},gamma={},lambda={},delta={}]",
        action.beta, action.gamma, action.lambda, action.delta
    )
}

fn sanitize_path_component(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn schedule_for(config: &ResolvedConfig, setting: Setting) -> Result<PhaseSchedule> {
    make_schedule_ordered(
        config.dataset.classes,
        config.schedule.phases,
        setting,
        config.schedule.class_order_seed,
    )
}

/// Split flat CSV datasets into per-phase sets following the schedule.
fn csv_phase_sets(
    config: &ResolvedConfig,
    schedule: &PhaseSchedule,
) -> Result<(Vec<LabeledDataset>, Vec<LabeledDataset>)> {
    let train_path = config.dataset.train_path.as_ref().expect("validated");
    let test_path = config.dataset.test_path.as_ref().expect("validated");
    let train = load_csv(Path::new(train_path), config.dataset.dim)?;
    let test = load_csv(Path::new(test_path), config.dataset.dim)?;
    for ds in [&train, &test] {
        if let Some(max) = ds.max_label() {
            if max >= config.dataset.classes {
                return Err(Error::Config(format!(
                    "csv label {max} exceeds configured class count {}",
                    config.dataset.classes
                )));
            }
        }
    }
    let slice = |ds: &LabeledDataset, classes: &[usize]| -> Result<LabeledDataset> {
        LabeledDataset::from_samples(
            ds.dim(),
            ds.iter()
                .filter(|s| classes.contains(&s.label))
                .cloned()
                .collect(),
        )
    };
    let mut train_sets = Vec::with_capacity(schedule.num_phases());
    let mut test_sets = Vec::with_capacity(schedule.num_phases());
    for classes in &schedule.classes_per_phase {
        train_sets.push(slice(&train, classes)?);
        test_sets.push(slice(&test, classes)?);
    }
    Ok((train_sets, test_sets))
}

struct CellResult {
    setting: Setting,
    seed: u64,
    outcome: ExperimentOutcome,
}

/// Run one (setting, seed) cell.
fn run_cell(
    config: &ResolvedConfig,
    method: &str,
    selection: &ActionSelection,
    setting: Setting,
    seed: u64,
) -> Result<CellResult> {
    let schedule = schedule_for(config, setting)?;
    let (train_sets, test_sets) = match config.dataset.kind {
        DatasetKind::Synthetic => synth_generate(
            &schedule,
            config.dataset.per_class_train,
            config.dataset.per_class_test,
            config.dataset.dim,
            config.dataset.separation,
            child_seed(seed, TAG_DATA),
        )?,
        DatasetKind::Csv => csv_phase_sets(config, &schedule)?,
    };
    let checkpoint_dir: Option<PathBuf> = match (&config.out, config.checkpoints) {
        (Some(out), true) => Some(
            Path::new(out)
                .join("checkpoints")
                .join(sanitize_path_component(method))
                .join(setting.to_string())
                .join(format!("seed_{seed}")),
        ),
        _ => None,
    };
    let outcome = run_experiment(
        &schedule,
        &train_sets,
        &test_sets,
        config.arch,
        selection,
        &config.orchestrator,
        child_seed(seed, TAG_EXPERIMENT),
        checkpoint_dir.as_deref(),
    )?;
    Ok(CellResult {
        setting,
        seed,
        outcome,
    })
}

/// Run all (setting, seed) cells for one method, optionally in parallel.
fn run_method_matrix(
    config: &ResolvedConfig,
    method: &str,
    selection: &ActionSelection,
) -> Result<Vec<CellResult>> {
    let tasks: Vec<(Setting, u64)> = config
        .settings
        .iter()
        .flat_map(|&s| config.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let mut cells = if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
        pool.install(|| {
            use rayon::prelude::*;
            tasks
                .par_iter()
                .map(|&(setting, seed)| run_cell(config, method, selection, setting, seed))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        tasks
            .iter()
            .map(|&(setting, seed)| run_cell(config, method, selection, setting, seed))
            .collect::<Result<Vec<_>>>()?
    };
    // Aggregation order is independent of scheduling.
    cells.sort_by_key(|c| (c.setting.to_string(), c.seed));
    Ok(cells)
}

fn summarize_method(
    config: &ResolvedConfig,
    method: &str,
    actions: Vec<Action>,
    cells: &[CellResult],
) -> (RunSummary, Vec<PhaseRow>, Vec<TraceRow>) {
    let mut settings: BTreeMap<String, SettingStats> = BTreeMap::new();
    let mut phase_rows = Vec::new();
    let mut trace_rows = Vec::new();

    for &setting in &config.settings {
        let of_setting: Vec<&CellResult> =
            cells.iter().filter(|c| c.setting == setting).collect();
        let per_seed: Vec<SeedStats> = of_setting
            .iter()
            .map(|c| SeedStats {
                seed: c.seed,
                phase_accuracies: c.outcome.accuracies.clone(),
                average_accuracy: c.outcome.average_accuracy,
            })
            .collect();
        let averages: Vec<f64> = per_seed.iter().map(|s| s.average_accuracy).collect();
        let stats = mean_std(&averages);
        settings.insert(
            setting.to_string(),
            SettingStats {
                per_seed,
                mean_average_accuracy: stats.mean,
                std_average_accuracy: stats.std,
            },
        );

        for cell in &of_setting {
            for phase in &cell.outcome.phases {
                phase_rows.push(PhaseRow {
                    method: method.to_string(),
                    setting: setting.to_string(),
                    seed: cell.seed,
                    phase: phase.phase,
                    accuracy: phase.accuracy,
                    chosen_beta: phase.action.beta,
                    chosen_gamma: phase.action.gamma,
                    chosen_lambda: phase.action.lambda,
                    chosen_delta: phase.action.delta.indicator(),
                });
                for record in &phase.trace {
                    trace_rows.push(TraceRow {
                        method: method.to_string(),
                        setting: setting.to_string(),
                        seed: cell.seed,
                        phase: phase.phase,
                        iteration: record.iteration,
                        action_index: record.action_index,
                        beta: record.action.beta,
                        gamma: record.action.gamma,
                        lambda: record.action.lambda,
                        delta: record.action.delta.indicator(),
                        probability: record.probability,
                        reward: record.reward,
                        cumulative_reward: record.cumulative_reward,
                    });
                }
            }
        }
    }

    // The headline column: per-seed mean of the TFH and TFS averages.
    let average = if config.settings.len() == 2 {
        let tfh = &settings[&Setting::Tfh.to_string()].per_seed;
        let tfs = &settings[&Setting::Tfs.to_string()].per_seed;
        let paired: Vec<f64> = tfh
            .iter()
            .zip(tfs)
            .map(|(a, b)| (a.average_accuracy + b.average_accuracy) / 2.0)
            .collect();
        Some(mean_std(&paired))
    } else {
        None
    };

    let summary = RunSummary {
        method: method.to_string(),
        config: config.clone(),
        actions,
        settings,
        average,
        grid_search: None,
        elapsed_seconds: 0.0,
    };
    (summary, phase_rows, trace_rows)
}

/// Execute the configured experiment and return its artifacts.
pub fn execute(config: &ResolvedConfig) -> Result<RunArtifacts> {
    let started = Instant::now();
    let mut artifacts = match config.mode {
        Mode::Online => {
            let selection = online_selection(&config.grid)?;
            let method = "online";
            let cells = run_method_matrix(config, method, &selection)?;
            let (summary, phases, traces) = summarize_method(
                config,
                method,
                selection.space.actions().to_vec(),
                &cells,
            );
            RunArtifacts {
                summary,
                phase_rows: phases,
                trace_rows: traces,
            }
        }
        Mode::Fixed => {
            let action = config
                .fixed_action
                .ok_or_else(|| Error::Config("fixed mode without an action".into()))?;
            let method = fixed_method_label(&action);
            let selection = ActionSelection::fixed_action(action);
            let cells = run_method_matrix(config, &method, &selection)?;
            let (summary, phases, traces) =
                summarize_method(config, &method, vec![action], &cells);
            RunArtifacts {
                summary,
                phase_rows: phases,
                trace_rows: traces,
            }
        }
        Mode::Ablation => {
            let subset = config
                .ablation
                .ok_or_else(|| Error::Config("ablation mode without a subset".into()))?;
            let baseline = config
                .fixed_action
                .ok_or_else(|| Error::Config("ablation mode without a baseline action".into()))?;
            let grid = ablation_grid(&config.grid, subset, &baseline);
            let method = format!("ablation[{}]", subset.label());
            let selection = online_selection(&grid)?;
            let cells = run_method_matrix(config, &method, &selection)?;
            let (summary, phases, traces) = summarize_method(
                config,
                &method,
                selection.space.actions().to_vec(),
                &cells,
            );
            RunArtifacts {
                summary,
                phase_rows: phases,
                trace_rows: traces,
            }
        }
        Mode::GridSearchFixed => grid_search_fixed(config)?,
    };
    artifacts.summary.elapsed_seconds = started.elapsed().as_secs_f64();
    Ok(artifacts)
}

/// Online selection over a grid. A one-action grid cannot back a bandit
/// (Exp3 needs two arms), so it degrades to the fixed-action path, which is
/// exactly equivalent for a single action.
fn online_selection(grid: &crate::hyperspace::GridSpec) -> Result<ActionSelection> {
    let actions = grid.enumerate()?;
    match actions.as_slice() {
        [] => Err(Error::InvalidGrid("grid resolved to no actions".into())),
        [only] => {
            log::info!("one-action grid: online mode degrades to the fixed path");
            Ok(ActionSelection::fixed_action(*only))
        }
        _ => ActionSelection::online(ActionSpace::from_grid(grid.clone())?),
    }
}

/// Evaluate every grid action as a fixed-for-all-phases policy and keep the
/// argmax (lowest index wins ties). Full candidate scores are retained in the
/// summary.
fn grid_search_fixed(config: &ResolvedConfig) -> Result<RunArtifacts> {
    let candidates = config.grid.enumerate()?;
    let mut scores = Vec::with_capacity(candidates.len());
    let mut all_phase_rows = Vec::new();
    let mut all_trace_rows = Vec::new();
    let mut best: Option<(usize, f64, RunSummary)> = None;

    for (index, &action) in candidates.iter().enumerate() {
        let method = fixed_method_label(&action);
        let selection = ActionSelection::fixed_action(action);
        let cells = run_method_matrix(config, &method, &selection)?;
        let (summary, phases, traces) = summarize_method(config, &method, vec![action], &cells);
        let score = summary
            .settings
            .values()
            .map(|s| s.mean_average_accuracy)
            .sum::<f64>()
            / summary.settings.len() as f64;
        scores.push(CandidateScore {
            index,
            action,
            score,
        });
        all_phase_rows.extend(phases);
        all_trace_rows.extend(traces);
        let better = match &best {
            None => true,
            Some((_, best_score, _)) => score > *best_score,
        };
        if better {
            best = Some((index, score, summary));
        }
    }

    let (best_index, _, mut summary) =
        best.ok_or_else(|| Error::InvalidGrid("grid resolved to no actions".into()))?;
    summary.grid_search = Some(GridSearchReport {
        candidates: scores,
        best_index,
        best_action: candidates[best_index],
    });
    Ok(RunArtifacts {
        summary,
        phase_rows: all_phase_rows,
        trace_rows: all_trace_rows,
    })
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::Config(format!("csv flush failed: {e}")))
}

/// Write `summary.json`, `phases.csv`, and `trace.csv` under `out_dir`.
pub fn write_outputs(artifacts: &RunArtifacts, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut summary_text = serde_json::to_string_pretty(&artifacts.summary)?;
    summary_text.push('\n');
    std::fs::write(out_dir.join("summary.json"), summary_text)?;
    std::fs::write(out_dir.join("phases.csv"), csv_bytes(&artifacts.phase_rows)?)?;
    std::fs::write(out_dir.join("trace.csv"), csv_bytes(&artifacts.trace_rows)?)?;
    Ok(())
}

/// Read a summary back from `summary.json`.
pub fn load_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Small, fast configuration for in-crate tests.
#[cfg(test)]
pub(crate) fn small_file_config() -> crate::harness::config::FileConfig {
    use crate::harness::config::{FileConfig, GridSection, RunSection, ScheduleSection};
    let mut file = FileConfig::default();
    file.dataset.classes = 4;
    file.dataset.dim = 6;
    file.dataset.separation = 5.0;
    file.dataset.per_class_train = 8;
    file.dataset.per_class_test = 4;
    file.schedule = ScheduleSection {
        phases: 2,
        setting: "both".into(),
        class_order_seed: None,
    };
    file.grid = GridSection {
        beta: vec![0.0, 1.0],
        gamma: vec![0.0],
        lambda: vec![0.05],
        delta: vec![0],
    };
    file.orchestrator.policy_iters = 2;
    file.orchestrator.m2_epochs = 4;
    file.orchestrator.local_val_per_class = 1;
    file.orchestrator.exemplar_budget = 2;
    file.orchestrator.batch_size = 4;
    file.model.hidden_dim = 8;
    file.model.feature_dim = 4;
    file.run = RunSection {
        seeds: vec![1, 2],
        mode: "online".into(),
        out: None,
        workers: 1,
        checkpoints: false,
    };
    file
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{resolve, Overrides};

    #[test]
    fn online_matrix_produces_consistent_stats() {
        let cfg = resolve(&small_file_config(), &Overrides::default()).unwrap();
        let artifacts = execute(&cfg).unwrap();
        let summary = &artifacts.summary;
        assert_eq!(summary.method, "online");
        assert_eq!(summary.settings.len(), 2);
        for stats in summary.settings.values() {
            assert_eq!(stats.per_seed.len(), 2);
            let averages: Vec<f64> =
                stats.per_seed.iter().map(|s| s.average_accuracy).collect();
            let recomputed = mean_std(&averages);
            assert_eq!(stats.mean_average_accuracy, recomputed.mean);
            assert_eq!(stats.std_average_accuracy, recomputed.std);
            for seed_stats in &stats.per_seed {
                let mean = seed_stats.phase_accuracies.iter().sum::<f64>()
                    / seed_stats.phase_accuracies.len() as f64;
                assert!((seed_stats.average_accuracy - mean).abs() < 1e-12);
            }
        }
        assert!(summary.average.is_some());
        // TFH has 3 phases (N=2 plus the half phase) and TFS 2, over 2 seeds
        // and 2 actions in the space.
        assert_eq!(artifacts.phase_rows.len(), 2 * 3 + 2 * 2);
        assert!(!artifacts.trace_rows.is_empty());
        assert_eq!(summary.actions.len(), 2);
    }

    #[test]
    fn matrix_is_deterministic_and_worker_independent() {
        let cfg = resolve(&small_file_config(), &Overrides::default()).unwrap();
        let a = execute(&cfg).unwrap();
        let mut parallel = cfg.clone();
        parallel.workers = 4;
        let b = execute(&parallel).unwrap();
        assert_eq!(a.phase_rows, b.phase_rows);
        assert_eq!(a.trace_rows, b.trace_rows);
        for (s, t) in a.summary.settings.values().zip(b.summary.settings.values()) {
            assert_eq!(s, t);
        }
    }

    #[test]
    fn fixed_mode_runs_and_labels_rows() {
        let mut file = small_file_config();
        file.run.mode = "fixed".into();
        let over = Overrides {
            beta: Some(1.0),
            gamma: Some(0.0),
            lambda: Some(0.05),
            delta: Some(0),
            ..Overrides::default()
        };
        let cfg = resolve(&file, &over).unwrap();
        let artifacts = execute(&cfg).unwrap();
        assert!(artifacts.summary.method.starts_with("fixed["));
        assert!(artifacts.trace_rows.is_empty());
        for row in &artifacts.phase_rows {
            if row.phase > 0 {
                assert_eq!(row.chosen_beta, 1.0);
                assert_eq!(row.chosen_delta, 0);
            }
        }
    }

    #[test]
    fn single_action_grid_degrades_to_fixed_path() {
        let mut file = small_file_config();
        file.grid.beta = vec![1.0];
        let online_cfg = resolve(&file, &Overrides::default()).unwrap();
        let online_run = execute(&online_cfg).unwrap();

        let mut fixed_file = small_file_config();
        fixed_file.run.mode = "fixed".into();
        let over = Overrides {
            beta: Some(1.0),
            gamma: Some(0.0),
            lambda: Some(0.05),
            delta: Some(0),
            ..Overrides::default()
        };
        let fixed_cfg = resolve(&fixed_file, &over).unwrap();
        let fixed_run = execute(&fixed_cfg).unwrap();

        let accuracies = |a: &RunArtifacts| -> Vec<f64> {
            a.phase_rows.iter().map(|r| r.accuracy).collect()
        };
        assert_eq!(accuracies(&online_run), accuracies(&fixed_run));
        assert_eq!(online_run.summary.method, "online");
    }

    #[test]
    fn grid_search_prefers_dominant_action() {
        let mut file = small_file_config();
        // Two candidates differing only in learning rate; 0.05 dominates the
        // absurdly small 1e-6 on this separable data.
        file.grid.beta = vec![0.0];
        file.grid.lambda = vec![1e-6, 0.05];
        file.run.mode = "grid_search_fixed".into();
        file.run.seeds = vec![1];
        file.schedule.setting = "tfs".into();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        let artifacts = execute(&cfg).unwrap();
        let report = artifacts.summary.grid_search.as_ref().unwrap();
        assert_eq!(report.candidates.len(), 2);
        assert_eq!(report.best_action.lambda, 0.05);
        assert!(report.candidates[1].score > report.candidates[0].score);
    }

    #[test]
    fn grid_search_single_candidate_returns_it() {
        let mut file = small_file_config();
        file.grid.beta = vec![1.0];
        file.grid.gamma = vec![0.0];
        file.grid.lambda = vec![0.05];
        file.grid.delta = vec![0];
        file.run.mode = "grid_search_fixed".into();
        file.run.seeds = vec![1];
        file.schedule.setting = "tfs".into();
        let cfg = resolve(&file, &Overrides::default()).unwrap();
        let artifacts = execute(&cfg).unwrap();
        let report = artifacts.summary.grid_search.as_ref().unwrap();
        assert_eq!(report.candidates.len(), 1);
        assert_eq!(report.best_index, 0);
        assert_eq!(report.best_action.beta, 1.0);
    }

    #[test]
    fn summary_reproducible_modulo_elapsed() {
        let cfg = resolve(&small_file_config(), &Overrides::default()).unwrap();
        let mut a = execute(&cfg).unwrap().summary;
        let mut b = execute(&cfg).unwrap().summary;
        a.elapsed_seconds = 0.0;
        b.elapsed_seconds = 0.0;
        assert_eq!(
            serde_json::to_string_pretty(&a).unwrap(),
            serde_json::to_string_pretty(&b).unwrap()
        );
    }

    #[test]
    fn outputs_round_trip(){
        let cfg = resolve(&small_file_config(), &Overrides::default()).unwrap();
        let artifacts = execute(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&artifacts, dir.path()).unwrap();
        let loaded = load_summary(&dir.path().join("summary.json")).unwrap();
        assert_eq!(loaded.method, artifacts.summary.method);
        assert_eq!(loaded.settings, artifacts.summary.settings);

        let mut reader = csv::Reader::from_path(dir.path().join("phases.csv")).unwrap();
        let rows: Vec<PhaseRow> = reader.deserialize().collect::<std::result::Result<_, _>>().unwrap();
        assert_eq!(rows, artifacts.phase_rows);
    }
}
