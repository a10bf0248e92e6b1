//! The incremental classifier: a two-layer dense extractor feeding a
//! cosine-normalized classification head without bias terms. The head grows
//! by appending rows as classes arrive; existing rows are never touched at
//! expansion time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::datastream::LabeledDataset;
use crate::error::{Error, Result};
use crate::hyperspace::Classifier;

/// Extractor nonlinearity. `Identity` exists for tests that need a linear map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
        }
    }

    /// Derivative expressed in terms of the activated output.
    fn derivative_from_output(self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Identity => 1.0,
        }
    }
}

/// Network shape plus the fixed cosine logit scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arch {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub feature_dim: usize,
    pub activation: Activation,
    /// Cosine logits live in [-1, 1]; this scale stretches them so
    /// cross-entropy has usable dynamic range.
    pub cosine_scale: f64,
}

impl Default for Arch {
    fn default() -> Self {
        Self {
            input_dim: 16,
            hidden_dim: 32,
            feature_dim: 8,
            activation: Activation::Tanh,
            cosine_scale: 10.0,
        }
    }
}

/// Model parameters; the per-phase state of the incremental learner.
///
/// Layout: `w1` is `hidden_dim x input_dim` row-major, `w2` is
/// `feature_dim x hidden_dim` row-major, `head` is `num_classes x
/// feature_dim` row-major with no bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelStateRepr")]
pub struct ModelState {
    pub(crate) arch: Arch,
    pub(crate) num_classes: usize,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
    pub(crate) head: Vec<f64>,
}

#[derive(Deserialize)]
struct ModelStateRepr {
    arch: Arch,
    num_classes: usize,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    head: Vec<f64>,
}

impl TryFrom<ModelStateRepr> for ModelState {
    type Error = Error;

    fn try_from(raw: ModelStateRepr) -> Result<Self> {
        let a = raw.arch;
        let checks = [
            ("w1", raw.w1.len(), a.hidden_dim * a.input_dim),
            ("b1", raw.b1.len(), a.hidden_dim),
            ("w2", raw.w2.len(), a.feature_dim * a.hidden_dim),
            ("b2", raw.b2.len(), a.feature_dim),
            ("head", raw.head.len(), raw.num_classes * a.feature_dim),
        ];
        for (what, got, expected) in checks {
            if got != expected {
                return Err(Error::Shape {
                    what: what.into(),
                    expected,
                    got,
                });
            }
        }
        let all = raw
            .w1
            .iter()
            .chain(&raw.b1)
            .chain(&raw.w2)
            .chain(&raw.b2)
            .chain(&raw.head);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "model parameters must be finite".into(),
            ));
        }
        Ok(ModelState {
            arch: raw.arch,
            num_classes: raw.num_classes,
            w1: raw.w1,
            b1: raw.b1,
            w2: raw.w2,
            b2: raw.b2,
            head: raw.head,
        })
    }
}

fn xavier(rng: &mut impl Rng, fan_in: usize, fan_out: usize, n: usize) -> Vec<f64> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.random_range(-bound..bound)).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Per-sample forward activations cached for backpropagation.
pub(crate) struct ForwardCache {
    pub hidden: Vec<f64>,
    pub features: Vec<f64>,
}

impl ModelState {
    /// Random initialization covering `num_classes` classes.
    pub fn random(arch: Arch, num_classes: usize, rng: &mut impl Rng) -> Self {
        let head_bound = 1.0 / (arch.feature_dim as f64).sqrt();
        Self {
            arch,
            num_classes,
            w1: xavier(rng, arch.input_dim, arch.hidden_dim, arch.hidden_dim * arch.input_dim),
            b1: vec![0.0; arch.hidden_dim],
            w2: xavier(rng, arch.hidden_dim, arch.feature_dim, arch.feature_dim * arch.hidden_dim),
            b2: vec![0.0; arch.feature_dim],
            head: (0..num_classes * arch.feature_dim)
                .map(|_| rng.random_range(-head_bound..head_bound))
                .collect(),
        }
    }

    /// All-zero parameters; useful for tests of degenerate behaviour.
    pub fn zeros(arch: Arch, num_classes: usize) -> Self {
        Self {
            arch,
            num_classes,
            w1: vec![0.0; arch.hidden_dim * arch.input_dim],
            b1: vec![0.0; arch.hidden_dim],
            w2: vec![0.0; arch.feature_dim * arch.hidden_dim],
            b2: vec![0.0; arch.feature_dim],
            head: vec![0.0; num_classes * arch.feature_dim],
        }
    }

    /// Identity extractor (requires square dims and `Activation::Identity`);
    /// test scaffolding for `f(x) = x` checks.
    pub fn identity(dim: usize, num_classes: usize) -> Self {
        let arch = Arch {
            input_dim: dim,
            hidden_dim: dim,
            feature_dim: dim,
            activation: Activation::Identity,
            cosine_scale: 10.0,
        };
        let mut eye = vec![0.0; dim * dim];
        for i in 0..dim {
            eye[i * dim + i] = 1.0;
        }
        Self {
            arch,
            num_classes,
            w1: eye.clone(),
            b1: vec![0.0; dim],
            w2: eye,
            b2: vec![0.0; dim],
            head: vec![0.0; num_classes * dim],
        }
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn head_row(&self, class: usize) -> &[f64] {
        let d = self.arch.feature_dim;
        &self.head[class * d..(class + 1) * d]
    }

    /// Overwrite a head row; test scaffolding for hand-set classifiers.
    pub fn set_head_row(&mut self, class: usize, row: &[f64]) -> Result<()> {
        if row.len() != self.arch.feature_dim {
            return Err(Error::Shape {
                what: format!("head row {class}"),
                expected: self.arch.feature_dim,
                got: row.len(),
            });
        }
        let d = self.arch.feature_dim;
        self.head[class * d..(class + 1) * d].copy_from_slice(row);
        Ok(())
    }

    /// Append head rows for new classes. Existing rows are left untouched.
    pub fn grow_head(&mut self, new_total: usize, rng: &mut impl Rng) -> Result<()> {
        if new_total < self.num_classes {
            return Err(Error::InvalidParameter(format!(
                "cannot shrink head from {} to {new_total} classes",
                self.num_classes
            )));
        }
        let bound = 1.0 / (self.arch.feature_dim as f64).sqrt();
        let extra = (new_total - self.num_classes) * self.arch.feature_dim;
        self.head
            .extend((0..extra).map(|_| rng.random_range(-bound..bound)));
        self.num_classes = new_total;
        Ok(())
    }

    pub(crate) fn forward_cached(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.arch.input_dim {
            return Err(Error::Shape {
                what: "input vector".into(),
                expected: self.arch.input_dim,
                got: x.len(),
            });
        }
        let a = &self.arch;
        let mut hidden = Vec::with_capacity(a.hidden_dim);
        for j in 0..a.hidden_dim {
            let row = &self.w1[j * a.input_dim..(j + 1) * a.input_dim];
            hidden.push(a.activation.apply(dot(row, x) + self.b1[j]));
        }
        let mut features = Vec::with_capacity(a.feature_dim);
        for j in 0..a.feature_dim {
            let row = &self.w2[j * a.hidden_dim..(j + 1) * a.hidden_dim];
            features.push(dot(row, &hidden) + self.b2[j]);
        }
        Ok(ForwardCache { hidden, features })
    }

    pub(crate) fn activation_derivative(&self, hidden_out: f64) -> f64 {
        self.arch.activation.derivative_from_output(hidden_out)
    }

    /// Map an input to its feature vector.
    pub fn forward_features(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_cached(x)?.features)
    }

    /// Scaled cosine logits for a precomputed feature vector.
    pub(crate) fn cosine_logits(&self, features: &[f64]) -> Result<Vec<f64>> {
        let nf = norm(features);
        if nf == 0.0 {
            return Err(Error::DegenerateCosine("feature vector".into()));
        }
        let mut logits = Vec::with_capacity(self.num_classes);
        for k in 0..self.num_classes {
            let row = self.head_row(k);
            let nh = norm(row);
            if nh == 0.0 {
                return Err(Error::DegenerateCosine(format!("head row {k}")));
            }
            let cos = (dot(features, row) / (nf * nh)).clamp(-1.0, 1.0);
            logits.push(self.arch.cosine_scale * cos);
        }
        Ok(logits)
    }

    /// Map an input to scaled cosine logits over the current classes.
    pub fn forward_logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        let f = self.forward_features(x)?;
        self.cosine_logits(&f)
    }

    /// Per-class L2-normalized mean features over `data`, which must contain
    /// at least one sample of every class the model currently covers.
    pub fn class_means(&self, data: &LabeledDataset) -> Result<ClassMeans> {
        let d = self.arch.feature_dim;
        let mut sums = vec![vec![0.0; d]; self.num_classes];
        let mut counts = vec![0usize; self.num_classes];
        for s in data.iter() {
            if s.label >= self.num_classes {
                return Err(Error::LabelOutOfRange {
                    label: s.label,
                    num_classes: self.num_classes,
                });
            }
            let f = self.forward_features(&s.features)?;
            for (acc, v) in sums[s.label].iter_mut().zip(&f) {
                *acc += v;
            }
            counts[s.label] += 1;
        }
        let mut means = Vec::with_capacity(self.num_classes);
        for (class, (mut sum, count)) in sums.into_iter().zip(counts).enumerate() {
            if count == 0 {
                return Err(Error::InsufficientData { class });
            }
            for v in &mut sum {
                *v /= count as f64;
            }
            let n = norm(&sum);
            if n == 0.0 {
                return Err(Error::DegenerateCosine(format!("class {class} mean")));
            }
            for v in &mut sum {
                *v /= n;
            }
            means.push(sum);
        }
        Ok(ClassMeans {
            classes: (0..self.num_classes).collect(),
            means,
        })
    }

    /// Predict a class id. `delta` selects the classifier: `Fc` takes the
    /// argmax of the cosine logits, `Ncm` the nearest normalized class mean
    /// by Euclidean distance. Ties break to the lowest class id.
    pub fn predict(
        &self,
        x: &[f64],
        delta: Classifier,
        means: Option<&ClassMeans>,
    ) -> Result<usize> {
        match delta {
            Classifier::Fc => {
                let logits = self.forward_logits(x)?;
                let mut best = 0;
                for (k, &z) in logits.iter().enumerate() {
                    if z > logits[best] {
                        best = k;
                    }
                }
                Ok(best)
            }
            Classifier::Ncm => {
                let means = means.ok_or(Error::MissingClassMeans)?;
                let f = self.forward_features(x)?;
                let nf = norm(&f);
                if nf == 0.0 {
                    return Err(Error::DegenerateCosine("feature vector".into()));
                }
                let unit: Vec<f64> = f.iter().map(|v| v / nf).collect();
                let mut best = 0;
                let mut best_dist = f64::INFINITY;
                for (k, mean) in means.means.iter().enumerate() {
                    let dist: f64 = unit
                        .iter()
                        .zip(mean)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    if dist < best_dist {
                        best_dist = dist;
                        best = k;
                    }
                }
                Ok(means.classes[best])
            }
        }
    }

    /// Fraction of correct predictions over `data`.
    pub fn accuracy_on(
        &self,
        data: &LabeledDataset,
        delta: Classifier,
        means: Option<&ClassMeans>,
    ) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyEvaluation);
        }
        let mut correct = 0usize;
        for s in data.iter() {
            if self.predict(&s.features, delta, means)? == s.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// L2-normalized per-class prototype features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMeans {
    pub classes: Vec<usize>,
    pub means: Vec<Vec<f64>>,
}

/// Greedy herding: repeatedly pick the unchosen sample whose inclusion moves
/// the running exemplar-feature mean closest (Euclidean) to the full class
/// mean. Returns `m` distinct indices in selection order; ties break to the
/// lowest index.
pub fn herding_select(model: &ModelState, xs: &[Vec<f64>], m: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "herding budget must be positive".into(),
        ));
    }
    if m > xs.len() {
        return Err(Error::HerdingBudget {
            requested: m,
            available: xs.len(),
        });
    }
    let feats: Vec<Vec<f64>> = xs
        .iter()
        .map(|x| model.forward_features(x))
        .collect::<Result<_>>()?;
    let d = model.arch.feature_dim;
    let mut target = vec![0.0; d];
    for f in &feats {
        for (t, v) in target.iter_mut().zip(f) {
            *t += v;
        }
    }
    for t in &mut target {
        *t /= feats.len() as f64;
    }

    let mut chosen = Vec::with_capacity(m);
    let mut taken = vec![false; feats.len()];
    let mut running = vec![0.0; d];
    for step in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for (i, f) in feats.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let k = (step + 1) as f64;
            let dist: f64 = target
                .iter()
                .zip(running.iter().zip(f))
                .map(|(t, (r, v))| {
                    let mean = (r + v) / k;
                    (t - mean) * (t - mean)
                })
                .sum();
            if best.map(|(_, b)| dist < b).unwrap_or(true) {
                best = Some((i, dist));
            }
        }
        let (idx, _) = best.expect("unchosen sample exists while step < m <= len");
        taken[idx] = true;
        for (r, v) in running.iter_mut().zip(&feats[idx]) {
            *r += v;
        }
        chosen.push(idx);
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datastream::Sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn zero_weights_give_zero_features() {
        let m = ModelState::zeros(Arch::default(), 3);
        let x = vec![1.0; 16];
        let f = m.forward_features(&x).unwrap();
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_extractor_passes_input_through() {
        let m = ModelState::identity(4, 2);
        let x = vec![0.5, -1.5, 2.0, 0.0];
        assert_eq!(m.forward_features(&x).unwrap(), x);
    }

    #[test]
    fn forward_matches_straight_line_recomputation() {
        let arch = Arch {
            input_dim: 5,
            hidden_dim: 4,
            feature_dim: 3,
            activation: Activation::Tanh,
            cosine_scale: 10.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = ModelState::random(arch, 2, &mut rng);
        let x: Vec<f64> = (0..5).map(|i| 0.3 * i as f64 - 0.7).collect();

        // Independent straight-line recomputation of the two affine maps.
        let mut hidden = [0.0; 4];
        for (j, h) in hidden.iter_mut().enumerate() {
            let mut acc = m.b1[j];
            for (i, &xv) in x.iter().enumerate() {
                acc += m.w1[j * 5 + i] * xv;
            }
            *h = acc.tanh();
        }
        let mut expect = [0.0; 3];
        for (j, e) in expect.iter_mut().enumerate() {
            let mut acc = m.b2[j];
            for (i, &hv) in hidden.iter().enumerate() {
                acc += m.w2[j * 4 + i] * hv;
            }
            *e = acc;
        }
        let got = m.forward_features(&x).unwrap();
        for (g, e) in got.iter().zip(expect) {
            assert_close(*g, e, 1e-15);
        }
    }

    #[test]
    fn forward_rejects_wrong_dim() {
        let m = ModelState::zeros(Arch::default(), 2);
        assert!(matches!(
            m.forward_features(&[1.0, 2.0]),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn logits_parallel_and_orthogonal() {
        let mut m = ModelState::identity(3, 2);
        m.set_head_row(0, &[2.0, 0.0, 0.0]).unwrap();
        m.set_head_row(1, &[0.0, 1.0, 0.0]).unwrap();
        let z = m.forward_logits(&[1.0, 0.0, 0.0]).unwrap();
        assert_close(z[0], 10.0, 1e-12); // parallel: cos = 1, scaled by s
        assert_close(z[1], 0.0, 1e-12); // orthogonal
    }

    #[test]
    fn logits_match_hand_computed_cosines() {
        let mut m = ModelState::identity(2, 3);
        m.set_head_row(0, &[1.0, 0.0]).unwrap();
        m.set_head_row(1, &[1.0, 1.0]).unwrap();
        m.set_head_row(2, &[-1.0, 0.0]).unwrap();
        let z = m.forward_logits(&[1.0, 1.0]).unwrap();
        let s = 10.0;
        assert_close(z[0], s * (1.0 / 2.0f64.sqrt()), 1e-12);
        assert_close(z[1], s * 1.0, 1e-12);
        assert_close(z[2], s * (-1.0 / 2.0f64.sqrt()), 1e-12);
    }

    #[test]
    fn zero_head_row_is_degenerate() {
        let m = ModelState::identity(2, 1);
        assert!(matches!(
            m.forward_logits(&[1.0, 0.0]),
            Err(Error::DegenerateCosine(_))
        ));
    }

    #[test]
    fn grow_head_appends_without_touching_old_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = ModelState::random(Arch::default(), 2, &mut rng);
        let old_rows = m.head.clone();
        m.grow_head(5, &mut rng).unwrap();
        assert_eq!(m.num_classes(), 5);
        assert_eq!(m.head.len(), 5 * 8);
        assert_eq!(&m.head[..old_rows.len()], old_rows.as_slice());
        assert!(m.grow_head(3, &mut rng).is_err());
    }

    #[test]
    fn class_means_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let arch = Arch {
            input_dim: 4,
            hidden_dim: 6,
            feature_dim: 3,
            activation: Activation::Tanh,
            cosine_scale: 10.0,
        };
        let m = ModelState::random(arch, 2, &mut rng);
        let samples: Vec<Sample> = (0..10)
            .map(|i| Sample {
                features: (0..4).map(|_| rng.random_range(-1.0..1.0)).collect(),
                label: i % 2,
            })
            .collect();
        let data = LabeledDataset::from_samples(4, samples.clone()).unwrap();
        let means = m.class_means(&data).unwrap();

        for class in 0..2 {
            let feats: Vec<Vec<f64>> = samples
                .iter()
                .filter(|s| s.label == class)
                .map(|s| m.forward_features(&s.features).unwrap())
                .collect();
            let mut mean = vec![0.0; 3];
            for f in &feats {
                for (a, v) in mean.iter_mut().zip(f) {
                    *a += v / feats.len() as f64;
                }
            }
            let n = norm(&mean);
            for (got, want) in means.means[class].iter().zip(mean.iter().map(|v| v / n)) {
                assert_close(*got, want, 1e-12);
            }
            assert_close(norm(&means.means[class]), 1.0, 1e-9);
        }
    }

    #[test]
    fn class_means_single_sample_is_normalized_feature() {
        let m = ModelState::identity(3, 1);
        let data = LabeledDataset::from_samples(
            3,
            vec![Sample {
                features: vec![3.0, 0.0, 4.0],
                label: 0,
            }],
        )
        .unwrap();
        let means = m.class_means(&data).unwrap();
        assert_close(means.means[0][0], 0.6, 1e-12);
        assert_close(means.means[0][2], 0.8, 1e-12);

        // Two identical samples give the same mean as one.
        let data2 = LabeledDataset::from_samples(
            3,
            vec![
                Sample {
                    features: vec![3.0, 0.0, 4.0],
                    label: 0,
                },
                Sample {
                    features: vec![3.0, 0.0, 4.0],
                    label: 0,
                },
            ],
        )
        .unwrap();
        assert_eq!(m.class_means(&data2).unwrap(), means);
    }

    #[test]
    fn class_means_missing_class() {
        let m = ModelState::identity(2, 2);
        let data = LabeledDataset::from_samples(
            2,
            vec![Sample {
                features: vec![1.0, 0.0],
                label: 0,
            }],
        )
        .unwrap();
        assert!(matches!(
            m.class_means(&data),
            Err(Error::InsufficientData { class: 1 })
        ));
    }

    #[test]
    fn ncm_predicts_exact_mean_match() {
        let m = ModelState::identity(2, 2);
        let means = ClassMeans {
            classes: vec![0, 1],
            means: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        assert_eq!(
            m.predict(&[2.0, 0.0], Classifier::Ncm, Some(&means)).unwrap(),
            0
        );
        assert_eq!(
            m.predict(&[0.0, 0.5], Classifier::Ncm, Some(&means)).unwrap(),
            1
        );
    }

    #[test]
    fn ncm_tie_breaks_to_lowest_class() {
        let m = ModelState::identity(2, 2);
        let means = ClassMeans {
            classes: vec![0, 1],
            means: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        // (1,1)/sqrt(2) is equidistant from both means.
        assert_eq!(
            m.predict(&[1.0, 1.0], Classifier::Ncm, Some(&means)).unwrap(),
            0
        );
    }

    #[test]
    fn fc_predicts_hand_computed_argmax() {
        let mut m = ModelState::identity(2, 3);
        m.set_head_row(0, &[1.0, 0.0]).unwrap();
        m.set_head_row(1, &[0.8, 0.6]).unwrap();
        m.set_head_row(2, &[0.0, 1.0]).unwrap();
        // x = (0.9, 0.45): cos with row 1 beats rows 0 and 2.
        assert_eq!(m.predict(&[0.9, 0.45], Classifier::Fc, None).unwrap(), 1);
    }

    #[test]
    fn ncm_requires_means() {
        let m = ModelState::identity(2, 2);
        assert!(matches!(
            m.predict(&[1.0, 0.0], Classifier::Ncm, None),
            Err(Error::MissingClassMeans)
        ));
    }

    #[test]
    fn fc_prediction_invariant_to_cosine_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut m = ModelState::random(Arch::default(), 4, &mut rng);
        let xs: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..16).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let before: Vec<usize> = xs
            .iter()
            .map(|x| m.predict(x, Classifier::Fc, None).unwrap())
            .collect();
        m.arch.cosine_scale *= 7.5;
        let after: Vec<usize> = xs
            .iter()
            .map(|x| m.predict(x, Classifier::Fc, None).unwrap())
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn ncm_prediction_invariant_to_feature_scaling() {
        let m = ModelState::identity(3, 2);
        let means = ClassMeans {
            classes: vec![0, 1],
            means: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]],
        };
        for scale in [0.1, 1.0, 42.0] {
            let x = vec![0.3 * scale, 0.1 * scale, 0.2 * scale];
            assert_eq!(m.predict(&x, Classifier::Ncm, Some(&means)).unwrap(), 0);
        }
    }

    #[test]
    fn accuracy_perfect_and_adversarial() {
        let m = ModelState::identity(2, 2);
        let means = ClassMeans {
            classes: vec![0, 1],
            means: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        };
        let good = LabeledDataset::from_samples(
            2,
            vec![
                Sample {
                    features: vec![5.0, 0.0],
                    label: 0,
                },
                Sample {
                    features: vec![0.0, 5.0],
                    label: 1,
                },
            ],
        )
        .unwrap();
        assert_close(
            m.accuracy_on(&good, Classifier::Ncm, Some(&means)).unwrap(),
            1.0,
            0.0,
        );
        let bad = LabeledDataset::from_samples(
            2,
            vec![
                Sample {
                    features: vec![5.0, 0.0],
                    label: 1,
                },
                Sample {
                    features: vec![0.0, 5.0],
                    label: 0,
                },
            ],
        )
        .unwrap();
        assert_close(
            m.accuracy_on(&bad, Classifier::Ncm, Some(&means)).unwrap(),
            0.0,
            0.0,
        );
    }

    #[test]
    fn accuracy_rejects_empty_dataset() {
        let m = ModelState::identity(2, 2);
        let empty = LabeledDataset::new(2);
        assert!(matches!(
            m.accuracy_on(&empty, Classifier::Fc, None),
            Err(Error::EmptyEvaluation)
        ));
    }

    #[test]
    fn random_model_scores_chance_level() {
        // Balanced 4-class data under an untrained model: ~25% accuracy.
        let mut accs = Vec::new();
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = ModelState::random(Arch::default(), 4, &mut rng);
            let samples: Vec<Sample> = (0..400)
                .map(|i| Sample {
                    features: (0..16).map(|_| rng.random_range(-2.0..2.0)).collect(),
                    label: i % 4,
                })
                .collect();
            let data = LabeledDataset::from_samples(16, samples).unwrap();
            accs.push(m.accuracy_on(&data, Classifier::Fc, None).unwrap());
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert_close(mean, 0.25, 0.05);
    }

    #[test]
    fn herding_takes_all_when_budget_is_class_size() {
        let m = ModelState::identity(2, 1);
        let xs: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, 1.0]).collect();
        let mut picked = herding_select(&m, &xs, 4).unwrap();
        picked.sort_unstable();
        assert_eq!(picked, vec![0, 1, 2, 3]);
    }

    #[test]
    fn herding_identical_samples_tie_to_lowest_index() {
        let m = ModelState::identity(2, 1);
        let xs = vec![vec![1.0, 1.0]; 5];
        assert_eq!(herding_select(&m, &xs, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn herding_budget_errors() {
        let m = ModelState::identity(2, 1);
        let xs = vec![vec![1.0, 1.0]; 3];
        assert!(herding_select(&m, &xs, 4).is_err());
        assert!(herding_select(&m, &xs, 0).is_err());
    }

    #[test]
    fn herding_beats_random_subsets() {
        // 30 random samples, budget 5: herding's exemplar mean must sit at
        // least as close to the class mean as the best of 200 random subsets
        // in >= 90% of 100 trials. The comparison runs on 32-dimensional
        // features: random-subset deviations stop cancelling as dimension
        // grows, while greedy selection keeps optimizing, so this is where
        // the gap is a stable property rather than a coin flip.
        let dim = 32;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let model = ModelState::identity(dim, 1);
        let mut wins = 0;
        for _ in 0..100 {
            let xs: Vec<Vec<f64>> = (0..30)
                .map(|_| {
                    (0..dim)
                        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                        .collect()
                })
                .collect();
            let mut target = vec![0.0; dim];
            for x in &xs {
                for (t, v) in target.iter_mut().zip(x) {
                    *t += v / 30.0;
                }
            }
            let subset_dist = |idx: &[usize]| {
                let mut mean = vec![0.0; dim];
                for &i in idx {
                    for (a, v) in mean.iter_mut().zip(&xs[i]) {
                        *a += v / idx.len() as f64;
                    }
                }
                target
                    .iter()
                    .zip(&mean)
                    .map(|(t, m)| (t - m) * (t - m))
                    .sum::<f64>()
                    .sqrt()
            };

            let herded = herding_select(&model, &xs, 5).unwrap();
            let herd_dist = subset_dist(&herded);

            let mut best_random = f64::INFINITY;
            for _ in 0..200 {
                let mut pool: Vec<usize> = (0..30).collect();
                for k in 0..5 {
                    let j = rng.random_range(k..pool.len());
                    pool.swap(k, j);
                }
                best_random = best_random.min(subset_dist(&pool[..5]));
            }
            if herd_dist <= best_random {
                wins += 1;
            }
        }
        assert!(wins >= 90, "herding won only {wins}/100 trials");
    }

    #[test]
    fn model_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = ModelState::random(Arch::default(), 3, &mut rng);
        let text = m.to_json().unwrap();
        let back = ModelState::from_json(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn model_json_rejects_shape_lies() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = ModelState::random(Arch::default(), 3, &mut rng);
        let text = m.to_json().unwrap().replace("\"num_classes\": 3", "\"num_classes\": 4");
        assert!(ModelState::from_json(&text).is_err());
    }
}
