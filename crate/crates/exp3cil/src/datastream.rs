//! Phase schedules, datasets, exemplar memory, and the local train/validation
//! rebuild.
//!
//! Two data-receiving settings are supported: training-from-half (`Tfh`),
//! where phase 0 holds half of all classes and the rest arrive evenly over N
//! more phases, and training-from-scratch (`Tfs`), where classes arrive
//! evenly over N phases starting from phase 0. The "N-phase" label in run
//! metadata follows that convention: a TFH schedule with N=5 has 6 actual
//! phases.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::{herding_select, ModelState};
use crate::seeding::{child_seed, TAG_CLASS, TAG_ORDER};

/// One labeled feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

/// An immutable collection of samples sharing one feature dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    dim: usize,
    samples: Vec<Sample>,
}

impl LabeledDataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            samples: Vec::new(),
        }
    }

    pub fn from_samples(dim: usize, samples: Vec<Sample>) -> Result<Self> {
        for (i, s) in samples.iter().enumerate() {
            if s.features.len() != dim {
                return Err(Error::Shape {
                    what: format!("sample {i}"),
                    expected: dim,
                    got: s.features.len(),
                });
            }
        }
        Ok(Self { dim, samples })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample> {
        self.samples.iter()
    }

    /// Number of samples per class id, in ascending class order.
    pub fn class_counts(&self) -> BTreeMap<usize, usize> {
        let mut counts = BTreeMap::new();
        for s in &self.samples {
            *counts.entry(s.label).or_insert(0) += 1;
        }
        counts
    }

    /// Distinct class ids present, ascending.
    pub fn classes(&self) -> Vec<usize> {
        self.class_counts().into_keys().collect()
    }

    pub fn max_label(&self) -> Option<usize> {
        self.samples.iter().map(|s| s.label).max()
    }

    /// Concatenate datasets in order. All must share the feature dimension.
    pub fn concat(parts: &[&LabeledDataset]) -> Result<LabeledDataset> {
        let dim = parts
            .first()
            .map(|d| d.dim)
            .ok_or_else(|| Error::InvalidParameter("concat of zero datasets".into()))?;
        let mut samples = Vec::new();
        for part in parts {
            if part.dim != dim {
                return Err(Error::Shape {
                    what: "dataset concat".into(),
                    expected: dim,
                    got: part.dim,
                });
            }
            samples.extend(part.samples.iter().cloned());
        }
        Ok(LabeledDataset { dim, samples })
    }
}

/// Data-receiving setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Tfh,
    Tfs,
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Setting::Tfh => write!(f, "tfh"),
            Setting::Tfs => write!(f, "tfs"),
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfh" => Ok(Setting::Tfh),
            "tfs" => Ok(Setting::Tfs),
            other => Err(Error::Config(format!(
                "unknown setting '{other}', expected tfh or tfs"
            ))),
        }
    }
}

/// Assignment of class ids to phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub total_classes: usize,
    /// The incremental phase count N: TFH runs N+1 actual phases (0..=N),
    /// TFS runs N actual phases (0..N).
    pub n: usize,
    pub setting: Setting,
    pub classes_per_phase: Vec<Vec<usize>>,
}

impl PhaseSchedule {
    pub fn num_phases(&self) -> usize {
        self.classes_per_phase.len()
    }

    /// Classes seen up to and including `phase`.
    pub fn classes_through(&self, phase: usize) -> usize {
        self.classes_per_phase[..=phase].iter().map(Vec::len).sum()
    }
}

/// Build a schedule with ascending class ids.
pub fn make_schedule(total_classes: usize, n: usize, setting: Setting) -> Result<PhaseSchedule> {
    make_schedule_ordered(total_classes, n, setting, None)
}

/// As [`make_schedule`], optionally permuting the class order by seed before
/// partitioning into phases.
pub fn make_schedule_ordered(
    total_classes: usize,
    n: usize,
    setting: Setting,
    order_seed: Option<u64>,
) -> Result<PhaseSchedule> {
    if total_classes < 2 {
        return Err(Error::Schedule(format!(
            "need at least 2 classes, got {total_classes}"
        )));
    }
    if n == 0 {
        return Err(Error::Schedule("phase count N must be at least 1".into()));
    }
    let mut ids: Vec<usize> = (0..total_classes).collect();
    if let Some(seed) = order_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, TAG_ORDER));
        ids.shuffle(&mut rng);
    }

    let sizes: Vec<usize> = match setting {
        Setting::Tfh => {
            let head = total_classes.div_ceil(2);
            let rest = total_classes - head;
            if !rest.is_multiple_of(n) {
                return Err(Error::Schedule(format!(
                    "TFH: remaining {rest} classes not divisible by N={n}"
                )));
            }
            let per = rest / n;
            if per == 0 {
                return Err(Error::Schedule(
                    "TFH: no classes left for incremental phases".into(),
                ));
            }
            std::iter::once(head)
                .chain(std::iter::repeat_n(per, n))
                .collect()
        }
        Setting::Tfs => {
            if !total_classes.is_multiple_of(n) {
                return Err(Error::Schedule(format!(
                    "TFS: {total_classes} classes not divisible by N={n}"
                )));
            }
            vec![total_classes / n; n]
        }
    };

    let mut classes_per_phase = Vec::with_capacity(sizes.len());
    let mut cursor = 0;
    for size in sizes {
        classes_per_phase.push(ids[cursor..cursor + size].to_vec());
        cursor += size;
    }
    Ok(PhaseSchedule {
        total_classes,
        n,
        setting,
        classes_per_phase,
    })
}

/// Generate per-phase Gaussian-cluster train/test sets.
///
/// Each class is an isotropic unit-variance Gaussian whose mean lies on a
/// sphere of radius `separation`. A class's cluster depends only on
/// (`seed`, class id), so schedules that partition the same classes
/// differently (TFH vs TFS) see identical underlying data. Train and test
/// samples are disjoint draws from the class stream.
pub fn synth_generate(
    schedule: &PhaseSchedule,
    per_class_train: usize,
    per_class_test: usize,
    dim: usize,
    separation: f64,
    seed: u64,
) -> Result<(Vec<LabeledDataset>, Vec<LabeledDataset>)> {
    if per_class_train == 0 || per_class_test == 0 {
        return Err(Error::InvalidParameter(
            "per-class sample counts must be positive".into(),
        ));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dim must be positive".into()));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "separation must be nonnegative, got {separation}"
        )));
    }

    let mut class_train: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    let mut class_test: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    for class in 0..schedule.total_classes {
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(
            child_seed(seed, TAG_CLASS),
            class as u64,
        ));
        let mut direction: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut direction {
                *v *= separation / norm;
            }
        } else {
            direction = vec![0.0; dim];
        }
        let draw = |rng: &mut ChaCha8Rng| Sample {
            features: (0..dim)
                .map(|i| direction[i] + rng.sample::<f64, _>(StandardNormal))
                .collect(),
            label: class,
        };
        class_train.insert(class, (0..per_class_train).map(|_| draw(&mut rng)).collect());
        class_test.insert(class, (0..per_class_test).map(|_| draw(&mut rng)).collect());
    }

    let mut train_phases = Vec::with_capacity(schedule.num_phases());
    let mut test_phases = Vec::with_capacity(schedule.num_phases());
    for classes in &schedule.classes_per_phase {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for &c in classes {
            train.extend(class_train[&c].iter().cloned());
            test.extend(class_test[&c].iter().cloned());
        }
        train_phases.push(LabeledDataset::from_samples(dim, train)?);
        test_phases.push(LabeledDataset::from_samples(dim, test)?);
    }
    Ok((train_phases, test_phases))
}

/// Load a headerless CSV of `label,v1,...,vdim` rows.
pub fn load_csv(path: &Path, dim: usize) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let row = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(Error::Shape {
                what: format!("{display} row {row}"),
                expected: dim + 1,
                got: fields.len(),
            });
        }
        let label: usize = fields[0].trim().parse().map_err(|_| Error::Parse {
            path: display.clone(),
            row,
            reason: format!("invalid label '{}'", fields[0].trim()),
        })?;
        let mut features = Vec::with_capacity(dim);
        for f in &fields[1..] {
            let v: f64 = f.trim().parse().map_err(|_| Error::Parse {
                path: display.clone(),
                row,
                reason: format!("invalid value '{}'", f.trim()),
            })?;
            features.push(v);
        }
        samples.push(Sample { features, label });
    }
    LabeledDataset::from_samples(dim, samples)
}

/// A rebuilt (local train, local validation) pair; the phase's proxy
/// environment while the true test set is off-limits.
#[derive(Debug, Clone)]
pub struct LocalEnvironment {
    pub train: LabeledDataset,
    pub val: LabeledDataset,
}

/// Carve a class-balanced validation subset out of `train`.
///
/// The validation half holds exactly `per_class_b` samples of every class
/// present; the remainder becomes the local training set. The two halves are
/// disjoint and their union is the input multiset.
pub fn split_local(
    train: &LabeledDataset,
    per_class_b: usize,
    seed: u64,
) -> Result<LocalEnvironment> {
    if per_class_b == 0 {
        return Err(Error::InvalidParameter(
            "per-class validation size must be positive".into(),
        ));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in train.iter().enumerate() {
        by_class.entry(s.label).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut val_indices = Vec::new();
    for (&class, indices) in &by_class {
        if indices.len() <= per_class_b {
            return Err(Error::Balance {
                class,
                available: indices.len(),
                needed: per_class_b,
            });
        }
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        val_indices.extend(shuffled.into_iter().take(per_class_b));
    }
    let in_val: std::collections::BTreeSet<usize> = val_indices.iter().copied().collect();

    let val_samples: Vec<Sample> = val_indices
        .iter()
        .map(|&i| train.samples()[i].clone())
        .collect();
    let train_samples: Vec<Sample> = train
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_val.contains(i))
        .map(|(_, s)| s.clone())
        .collect();

    Ok(LocalEnvironment {
        train: LabeledDataset::from_samples(train.dim(), train_samples)?,
        val: LabeledDataset::from_samples(train.dim(), val_samples)?,
    })
}

/// Per-class retained samples with a fixed per-class budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExemplarStore {
    per_class: BTreeMap<usize, Vec<Sample>>,
    budget: usize,
}

impl ExemplarStore {
    pub fn new(per_class_budget: usize) -> Result<Self> {
        if per_class_budget == 0 {
            return Err(Error::InvalidParameter(
                "exemplar budget must be positive".into(),
            ));
        }
        Ok(Self {
            per_class: BTreeMap::new(),
            budget: per_class_budget,
        })
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn classes(&self) -> Vec<usize> {
        self.per_class.keys().copied().collect()
    }

    pub fn contains(&self, class: usize) -> bool {
        self.per_class.contains_key(&class)
    }

    pub fn exemplars_of(&self, class: usize) -> Option<&[Sample]> {
        self.per_class.get(&class).map(Vec::as_slice)
    }

    pub fn total_len(&self) -> usize {
        self.per_class.values().map(Vec::len).sum()
    }

    /// All retained samples as one dataset, classes ascending.
    pub fn all_samples(&self, dim: usize) -> Result<LabeledDataset> {
        let samples: Vec<Sample> = self
            .per_class
            .values()
            .flat_map(|v| v.iter().cloned())
            .collect();
        LabeledDataset::from_samples(dim, samples)
    }
}

/// Select exemplars for every class of `new_data` that the store does not
/// hold yet, using herding under `model`'s features. Existing classes'
/// exemplars are retained unchanged.
pub fn update_exemplars(
    store: &ExemplarStore,
    model: &ModelState,
    new_data: &LabeledDataset,
) -> Result<ExemplarStore> {
    let mut next = store.clone();
    let mut by_class: BTreeMap<usize, Vec<&Sample>> = BTreeMap::new();
    for s in new_data.iter() {
        by_class.entry(s.label).or_default().push(s);
    }
    for (class, samples) in by_class {
        if next.contains(class) {
            continue;
        }
        if samples.len() < store.budget {
            return Err(Error::Budget {
                class,
                requested: store.budget,
                available: samples.len(),
            });
        }
        let xs: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
        let picked = herding_select(model, &xs, store.budget)?;
        next.per_class.insert(
            class,
            picked.into_iter().map(|i| samples[i].clone()).collect(),
        );
    }
    Ok(next)
}

/// A dataset wrapper that counts reads, so the phase driver can prove the
/// held-out test set was never touched before final evaluation.
#[derive(Debug)]
pub struct AuditedDataset {
    data: LabeledDataset,
    reads: AtomicU64,
}

impl AuditedDataset {
    pub fn new(data: LabeledDataset) -> Self {
        Self {
            data,
            reads: AtomicU64::new(0),
        }
    }

    /// Access the underlying data, incrementing the audit counter.
    pub fn read(&self) -> &LabeledDataset {
        self.reads.fetch_add(1, Ordering::SeqCst);
        &self.data
    }

    pub fn read_count(&self) -> u64 {
        self.reads.load(Ordering::SeqCst)
    }
}
