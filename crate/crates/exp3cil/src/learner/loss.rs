//! Losses, hand-derived gradients, SGD, and the epoch training loop.
//!
//! The overall training loss is `CE + beta * logit-KD + gamma * feature-KD`,
//! averaged over the mini-batch. Gradients are exact analytic derivatives of
//! that scalar with respect to every model parameter; the test suites check
//! each entry against central finite differences.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::datastream::{LabeledDataset, Sample};
use crate::error::{Error, Result};
use crate::hyperspace::Action;
use crate::learner::model::{dot, norm, ModelState};

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    out
}

/// Numerically stable log-softmax.
pub fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|&v| v - max - log_sum).collect()
}

/// Temperature rescaling `eta_k(v) = v_k^(1/tau) / sum_j v_j^(1/tau)` over a
/// probability vector. Order-preserving for every `tau > 1`.
pub fn rescale_eta(probs: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !tau.is_finite() || tau <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "tau must be a finite real greater than 1, got {tau}"
        )));
    }
    if probs.is_empty() {
        return Err(Error::Domain("eta input is empty".into()));
    }
    let mut sum_in = 0.0;
    for &v in probs {
        if v.is_nan() || v < 0.0 {
            return Err(Error::Domain(format!(
                "eta input must be nonnegative, got {v}"
            )));
        }
        sum_in += v;
    }
    if (sum_in - 1.0).abs() > 1e-6 {
        return Err(Error::Domain(format!(
            "eta input must sum to 1 (+-1e-6), got {sum_in}"
        )));
    }
    let mut out: Vec<f64> = probs.iter().map(|&v| v.powf(1.0 / tau)).collect();
    let sum: f64 = out.iter().sum();
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

/// Cross-entropy between temperature-rescaled prediction distributions:
/// the current logits are pulled toward the old model's logits.
///
/// Since `eta(softmax(z)) = softmax(z / tau)`, the loss is evaluated on
/// temperature-scaled logits directly, which is the stable form.
pub fn logit_kd_loss(cur_logits: &[f64], old_logits: &[f64], tau: f64) -> Result<f64> {
    logit_kd_loss_grad(cur_logits, old_logits, tau).map(|(loss, _)| loss)
}

/// [`logit_kd_loss`] together with its gradient with respect to `cur_logits`.
pub fn logit_kd_loss_grad(
    cur_logits: &[f64],
    old_logits: &[f64],
    tau: f64,
) -> Result<(f64, Vec<f64>)> {
    if cur_logits.len() != old_logits.len() {
        return Err(Error::Shape {
            what: "logit KD vectors".into(),
            expected: old_logits.len(),
            got: cur_logits.len(),
        });
    }
    if cur_logits.is_empty() {
        return Err(Error::Domain("logit KD on empty vectors".into()));
    }
    if !tau.is_finite() || tau <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "tau must be a finite real greater than 1, got {tau}"
        )));
    }
    let scaled_old: Vec<f64> = old_logits.iter().map(|&v| v / tau).collect();
    let scaled_cur: Vec<f64> = cur_logits.iter().map(|&v| v / tau).collect();
    let target = softmax(&scaled_old);
    let log_q = log_softmax(&scaled_cur);
    let loss = -dot(&target, &log_q);
    let q = softmax(&scaled_cur);
    let grad: Vec<f64> = q
        .iter()
        .zip(&target)
        .map(|(qk, tk)| (qk - tk) / tau)
        .collect();
    Ok((loss, grad))
}

/// One minus the cosine similarity of two feature vectors; in `[0, 2]`.
pub fn feature_kd_loss(cur_feat: &[f64], old_feat: &[f64]) -> Result<f64> {
    feature_kd_loss_grad(cur_feat, old_feat).map(|(loss, _)| loss)
}

/// [`feature_kd_loss`] together with its gradient with respect to `cur_feat`
/// (the old model is frozen, so no gradient flows into `old_feat`).
pub fn feature_kd_loss_grad(cur_feat: &[f64], old_feat: &[f64]) -> Result<(f64, Vec<f64>)> {
    if cur_feat.len() != old_feat.len() {
        return Err(Error::Shape {
            what: "feature KD vectors".into(),
            expected: old_feat.len(),
            got: cur_feat.len(),
        });
    }
    let nc = norm(cur_feat);
    let no = norm(old_feat);
    if nc == 0.0 || no == 0.0 {
        return Err(Error::DegenerateCosine("feature KD input".into()));
    }
    let cos = dot(cur_feat, old_feat) / (nc * no);
    let loss = (1.0 - cos.clamp(-1.0, 1.0)).clamp(0.0, 2.0);
    let grad: Vec<f64> = cur_feat
        .iter()
        .zip(old_feat)
        .map(|(&c, &o)| -(o / (nc * no) - cos * c / (nc * nc)))
        .collect();
    Ok((loss, grad))
}

/// Weights of the loss terms for one training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub tau: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LossConfig {
    pub fn new(tau: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "tau must be a finite real greater than 1, got {tau}"
            )));
        }
        if beta < 0.0 || gamma < 0.0 || !beta.is_finite() || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "KD weights must be nonnegative, got beta={beta}, gamma={gamma}"
            )));
        }
        Ok(Self { tau, beta, gamma })
    }
}

/// Parameter-shaped gradient set, laid out like [`ModelState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub head: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &ModelState) -> Self {
        Self {
            w1: vec![0.0; model.w1.len()],
            b1: vec![0.0; model.b1.len()],
            w2: vec![0.0; model.w2.len()],
            b2: vec![0.0; model.b2.len()],
            head: vec![0.0; model.head.len()],
        }
    }

    fn scale(&mut self, factor: f64) {
        for part in [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.head,
        ] {
            for v in part.iter_mut() {
                *v *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .chain(&self.head)
            .all(|v| v.is_finite())
    }

    /// Flatten in the same order as [`ModelState::param_vector`].
    pub fn to_vector(&self) -> Vec<f64> {
        let mut out =
            Vec::with_capacity(self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len() + self.head.len());
        out.extend(&self.w1);
        out.extend(&self.b1);
        out.extend(&self.w2);
        out.extend(&self.b2);
        out.extend(&self.head);
        out
    }
}

impl ModelState {
    /// All parameters flattened as `w1, b1, w2, b2, head`; the order matches
    /// [`Gradients::to_vector`].
    pub fn param_vector(&self) -> Vec<f64> {
        let mut out = Vec::new();
        out.extend(&self.w1);
        out.extend(&self.b1);
        out.extend(&self.w2);
        out.extend(&self.b2);
        out.extend(&self.head);
        out
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len() + self.head.len()
    }

    /// Overwrite all parameters from a flat vector (inverse of
    /// [`param_vector`](Self::param_vector)).
    pub fn set_param_vector(&mut self, v: &[f64]) -> Result<()> {
        if v.len() != self.num_params() {
            return Err(Error::Shape {
                what: "parameter vector".into(),
                expected: self.num_params(),
                got: v.len(),
            });
        }
        let mut cursor = 0;
        for part in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2, &mut self.head] {
            let len = part.len();
            part.copy_from_slice(&v[cursor..cursor + len]);
            cursor += len;
        }
        Ok(())
    }
}

/// Batch-mean overall loss and its exact gradients.
///
/// With no old model both KD weights must be zero (the first phase has
/// nothing to distill from). Logit KD covers the old model's classes only.
pub fn overall_loss_and_grad(
    batch: &[&Sample],
    model: &ModelState,
    old_model: Option<&ModelState>,
    cfg: &LossConfig,
) -> Result<(f64, Gradients)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if old_model.is_none() && (cfg.beta != 0.0 || cfg.gamma != 0.0) {
        return Err(Error::MissingTeacher {
            beta: cfg.beta,
            gamma: cfg.gamma,
        });
    }
    if let Some(old) = old_model {
        if old.num_classes() > model.num_classes() {
            return Err(Error::Shape {
                what: "old model class count".into(),
                expected: model.num_classes(),
                got: old.num_classes(),
            });
        }
        if old.arch().feature_dim != model.arch().feature_dim
            || old.arch().input_dim != model.arch().input_dim
        {
            return Err(Error::Shape {
                what: "old model feature dim".into(),
                expected: model.arch().feature_dim,
                got: old.arch().feature_dim,
            });
        }
    }

    let arch = *model.arch();
    let scale = arch.cosine_scale;
    let mut grads = Gradients::zeros_like(model);
    let mut total_loss = 0.0;

    for sample in batch {
        if sample.label >= model.num_classes() {
            return Err(Error::LabelOutOfRange {
                label: sample.label,
                num_classes: model.num_classes(),
            });
        }
        let cache = model.forward_cached(&sample.features)?;
        let features = &cache.features;
        let logits = model.cosine_logits(features)?;

        // Cross-entropy.
        let log_probs = log_softmax(&logits);
        let mut loss = -log_probs[sample.label];
        let mut dlogits: Vec<f64> = log_probs.iter().map(|&lp| lp.exp()).collect();
        dlogits[sample.label] -= 1.0;

        // Feature-space gradient accumulated from all loss terms.
        let mut dfeatures = vec![0.0; arch.feature_dim];

        if let Some(old) = old_model {
            let k_old = old.num_classes();
            if cfg.beta > 0.0 {
                let old_logits = old.forward_logits(&sample.features)?;
                let (kd, dkd) = logit_kd_loss_grad(&logits[..k_old], &old_logits, cfg.tau)?;
                loss += cfg.beta * kd;
                for (d, g) in dlogits[..k_old].iter_mut().zip(&dkd) {
                    *d += cfg.beta * g;
                }
            }
            if cfg.gamma > 0.0 {
                let old_features = old.forward_features(&sample.features)?;
                let (fd, dfd) = feature_kd_loss_grad(features, &old_features)?;
                loss += cfg.gamma * fd;
                for (d, g) in dfeatures.iter_mut().zip(&dfd) {
                    *d += cfg.gamma * g;
                }
            }
        }

        // Cosine head backward: z_k = s * (f . h_k) / (|f| |h_k|).
        let nf = norm(features);
        for (k, &dz) in dlogits.iter().enumerate() {
            if dz == 0.0 {
                continue;
            }
            let row = model.head_row(k);
            let nh = norm(row);
            let u = dot(features, row);
            let coef = scale / (nf * nh);
            for j in 0..arch.feature_dim {
                dfeatures[j] += dz * coef * (row[j] - u / (nf * nf) * features[j]);
                grads.head[k * arch.feature_dim + j] +=
                    dz * coef * (features[j] - u / (nh * nh) * row[j]);
            }
        }

        // Extractor backward.
        for (j, &df) in dfeatures.iter().enumerate() {
            if df == 0.0 {
                continue;
            }
            grads.b2[j] += df;
            let row = &mut grads.w2[j * arch.hidden_dim..(j + 1) * arch.hidden_dim];
            for (g, h) in row.iter_mut().zip(&cache.hidden) {
                *g += df * h;
            }
        }
        for i in 0..arch.hidden_dim {
            let mut da = 0.0;
            for (j, &df) in dfeatures.iter().enumerate() {
                da += model.w2[j * arch.hidden_dim + i] * df;
            }
            let dpre = da * model.activation_derivative(cache.hidden[i]);
            if dpre == 0.0 {
                continue;
            }
            grads.b1[i] += dpre;
            let row = &mut grads.w1[i * arch.input_dim..(i + 1) * arch.input_dim];
            for (g, x) in row.iter_mut().zip(&sample.features) {
                *g += dpre * x;
            }
        }

        total_loss += loss;
    }

    let inv = 1.0 / batch.len() as f64;
    grads.scale(inv);
    Ok((total_loss * inv, grads))
}

/// Plain gradient step: every parameter `p <- p - lambda * g`.
pub fn sgd_step(mut model: ModelState, grads: &Gradients, lambda: f64) -> Result<ModelState> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be a nonnegative finite real, got {lambda}"
        )));
    }
    if !grads.is_finite() {
        return Err(Error::NonFiniteGradient("sgd step"));
    }
    let pairs: [(&mut Vec<f64>, &Vec<f64>); 5] = [
        (&mut model.w1, &grads.w1),
        (&mut model.b1, &grads.b1),
        (&mut model.w2, &grads.w2),
        (&mut model.b2, &grads.b2),
        (&mut model.head, &grads.head),
    ];
    for (params, gs) in pairs {
        if params.len() != gs.len() {
            return Err(Error::Shape {
                what: "gradient block".into(),
                expected: params.len(),
                got: gs.len(),
            });
        }
        for (p, g) in params.iter_mut().zip(gs) {
            *p -= lambda * g;
        }
    }
    Ok(model)
}

/// Run `epochs` shuffled mini-batch sweeps of loss + SGD using the action's
/// KD weights and learning rate. Deterministic given the RNG state.
#[allow(clippy::too_many_arguments)]
pub fn train_for_epochs(
    model: ModelState,
    old_model: Option<&ModelState>,
    action: &Action,
    tau: f64,
    data: &LabeledDataset,
    epochs: usize,
    batch_size: usize,
    rng: &mut impl Rng,
) -> Result<ModelState> {
    if epochs == 0 {
        return Err(Error::InvalidParameter("epochs must be at least 1".into()));
    }
    if batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be positive".into()));
    }
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let cfg = LossConfig::new(tau, action.beta, action.gamma)?;
    let samples = data.samples();
    let mut indices: Vec<usize> = (0..samples.len()).collect();
    let mut model = model;
    for _ in 0..epochs {
        indices.shuffle(rng);
        for chunk in indices.chunks(batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &samples[i]).collect();
            let (_, grads) = overall_loss_and_grad(&batch, &model, old_model, &cfg)?;
            model = sgd_step(model, &grads, action.lambda)?;
        }
    }
    Ok(model)
}
