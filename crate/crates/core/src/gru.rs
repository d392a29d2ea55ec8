//! Single-layer GRU regressor over scalar sequences with a sigmoid head.
//!
//! Recurrence, from `h₀ = 0`:
//!
//! ```text
//! z = σ(w_z·x + U_z·h + b_z)
//! r = σ(w_r·x + U_r·h + b_r)
//! n = tanh(w_n·x + U_n·(r ⊙ h) + b_n)
//! h' = (1 − z) ⊙ n + z ⊙ h
//! ŷ = σ(w_out · h_T + b_out)
//! ```
//!
//! Gradients are computed by hand in [`gru_backward`] and trained with plain
//! mini-batch SGD in [`train`].

use std::ops::Range;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_HIDDEN: usize = 32;
pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum GruError {
    #[error("input sequence is empty")]
    EmptySequence,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("model has not been trained")]
    NotTrained,
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
    #[error("unsupported checkpoint format version {0}")]
    UnsupportedVersion(u32),
    #[error("non-finite parameter")]
    NonFinite,
}

/// Parameter blocks in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    WZ,
    UZ,
    BZ,
    WR,
    UR,
    BR,
    WN,
    UN,
    BN,
    WOut,
    BOut,
}

impl Block {
    pub const ALL: [Block; 11] = [
        Block::WZ,
        Block::UZ,
        Block::BZ,
        Block::WR,
        Block::UR,
        Block::BR,
        Block::WN,
        Block::UN,
        Block::BN,
        Block::WOut,
        Block::BOut,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Block::WZ => "w_z",
            Block::UZ => "u_z",
            Block::BZ => "b_z",
            Block::WR => "w_r",
            Block::UR => "u_r",
            Block::BR => "b_r",
            Block::WN => "w_n",
            Block::UN => "u_n",
            Block::BN => "b_n",
            Block::WOut => "w_out",
            Block::BOut => "b_out",
        }
    }

    fn len(self, hidden: usize) -> usize {
        match self {
            Block::UZ | Block::UR | Block::UN => hidden * hidden,
            Block::BOut => 1,
            _ => hidden,
        }
    }
}

/// All weights in one flat buffer; [`Block`] names the slices.
///
/// Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct GruParams {
    hidden: usize,
    data: Vec<f64>,
}

impl GruParams {
    pub fn parameter_count(hidden: usize) -> usize {
        Block::ALL.iter().map(|b| b.len(hidden)).sum()
    }

    pub fn zeros(hidden: usize) -> Self {
        Self {
            hidden,
            data: vec![0.0; Self::parameter_count(hidden)],
        }
    }

    /// Uniform in `±1/√H`, the usual recurrent initialization.
    pub fn init(hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut p = Self::zeros(hidden);
        for v in &mut p.data {
            *v = rng.random_range(-bound..bound);
        }
        p
    }

    pub fn from_flat(hidden: usize, data: Vec<f64>) -> Result<Self, GruError> {
        if hidden == 0 || data.len() != Self::parameter_count(hidden) {
            return Err(GruError::ShapeMismatch(format!(
                "{} values for hidden size {hidden}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(GruError::NonFinite);
        }
        Ok(Self { hidden, data })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn range(&self, block: Block) -> Range<usize> {
        let mut start = 0;
        for b in Block::ALL {
            let len = b.len(self.hidden);
            if b == block {
                return start..start + len;
            }
            start += len;
        }
        unreachable!()
    }

    pub fn block(&self, block: Block) -> &[f64] {
        &self.data[self.range(block)]
    }

    pub fn block_mut(&mut self, block: Block) -> &mut [f64] {
        let r = self.range(block);
        &mut self.data[r]
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &GruParams, scale: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Per-step activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct GruCache {
    hidden: usize,
    inputs: Vec<f64>,
    /// `T + 1` hidden states, starting with the zero state.
    states: Vec<Vec<f64>>,
    update: Vec<Vec<f64>>,
    reset: Vec<Vec<f64>>,
    candidate: Vec<Vec<f64>>,
    prediction: f64,
}

impl GruCache {
    pub fn prediction(&self) -> f64 {
        self.prediction
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("at least the initial state")
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `out = W·v` for a row-major `H×H` matrix.
fn matvec(w: &[f64], v: &[f64], out: &mut [f64]) {
    let h = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = w[i * h..(i + 1) * h]
            .iter()
            .zip(v)
            .map(|(a, b)| a * b)
            .sum();
    }
}

/// `out += Wᵀ·v`.
fn matvec_t_acc(w: &[f64], v: &[f64], out: &mut [f64]) {
    let h = v.len();
    for (i, vi) in v.iter().enumerate() {
        for (o, wij) in out.iter_mut().zip(&w[i * h..(i + 1) * h]) {
            *o += wij * vi;
        }
    }
}

/// `W += a ⊗ b`.
fn outer_acc(w: &mut [f64], a: &[f64], b: &[f64]) {
    let h = b.len();
    for (i, ai) in a.iter().enumerate() {
        for (wij, bj) in w[i * h..(i + 1) * h].iter_mut().zip(b) {
            *wij += ai * bj;
        }
    }
}

pub fn gru_forward(params: &GruParams, sequence: &[f64]) -> Result<(f64, GruCache), GruError> {
    if sequence.is_empty() {
        return Err(GruError::EmptySequence);
    }
    let hsz = params.hidden;
    let (wz, uz, bz) = (
        params.block(Block::WZ),
        params.block(Block::UZ),
        params.block(Block::BZ),
    );
    let (wr, ur, br) = (
        params.block(Block::WR),
        params.block(Block::UR),
        params.block(Block::BR),
    );
    let (wn, un, bn) = (
        params.block(Block::WN),
        params.block(Block::UN),
        params.block(Block::BN),
    );

    let steps = sequence.len();
    let mut states = Vec::with_capacity(steps + 1);
    let mut update = Vec::with_capacity(steps);
    let mut reset = Vec::with_capacity(steps);
    let mut candidate = Vec::with_capacity(steps);
    states.push(vec![0.0; hsz]);
    let mut tmp = vec![0.0; hsz];
    let mut rh = vec![0.0; hsz];

    for &x in sequence {
        let h = states.last().expect("initial state");
        let mut z = vec![0.0; hsz];
        matvec(uz, h, &mut z);
        for i in 0..hsz {
            z[i] = sigmoid(z[i] + wz[i] * x + bz[i]);
        }
        let mut r = vec![0.0; hsz];
        matvec(ur, h, &mut r);
        for i in 0..hsz {
            r[i] = sigmoid(r[i] + wr[i] * x + br[i]);
            rh[i] = r[i] * h[i];
        }
        matvec(un, &rh, &mut tmp);
        let n: Vec<f64> = (0..hsz)
            .map(|i| (tmp[i] + wn[i] * x + bn[i]).tanh())
            .collect();
        let next: Vec<f64> = (0..hsz)
            .map(|i| (1.0 - z[i]) * n[i] + z[i] * h[i])
            .collect();
        update.push(z);
        reset.push(r);
        candidate.push(n);
        states.push(next);
    }

    let last = states.last().expect("final state");
    let logit: f64 = params
        .block(Block::WOut)
        .iter()
        .zip(last)
        .map(|(w, h)| w * h)
        .sum::<f64>()
        + params.block(Block::BOut)[0];
    let prediction = sigmoid(logit);
    Ok((
        prediction,
        GruCache {
            hidden: hsz,
            inputs: sequence.to_vec(),
            states,
            update,
            reset,
            candidate,
            prediction,
        },
    ))
}

/// Reverse-mode gradients of a scalar loss given `dLoss/dPrediction`.
pub fn gru_backward(
    params: &GruParams,
    cache: &GruCache,
    loss_grad: f64,
) -> Result<GruParams, GruError> {
    let hsz = params.hidden;
    if cache.hidden != hsz || cache.states.len() != cache.inputs.len() + 1 {
        return Err(GruError::ShapeMismatch(format!(
            "cache hidden {} vs params hidden {hsz}",
            cache.hidden
        )));
    }
    let mut grads = GruParams::zeros(hsz);
    if loss_grad == 0.0 {
        return Ok(grads);
    }
    let p = cache.prediction;
    let dlogit = loss_grad * p * (1.0 - p);
    let last = cache.final_state();
    for (g, h) in grads.block_mut(Block::WOut).iter_mut().zip(last) {
        *g = dlogit * h;
    }
    grads.block_mut(Block::BOut)[0] = dlogit;
    let mut dh: Vec<f64> = params
        .block(Block::WOut)
        .iter()
        .map(|w| dlogit * w)
        .collect();

    let (uz, ur, un) = (
        params.block(Block::UZ),
        params.block(Block::UR),
        params.block(Block::UN),
    );
    let mut dn_pre = vec![0.0; hsz];
    let mut dz_pre = vec![0.0; hsz];
    let mut dr_pre = vec![0.0; hsz];
    let mut drh = vec![0.0; hsz];
    let mut rh = vec![0.0; hsz];

    for t in (0..cache.inputs.len()).rev() {
        let x = cache.inputs[t];
        let h_prev = &cache.states[t];
        let (z, r, n) = (&cache.update[t], &cache.reset[t], &cache.candidate[t]);
        let mut dh_prev = vec![0.0; hsz];
        for i in 0..hsz {
            let dn = dh[i] * (1.0 - z[i]);
            let dz = dh[i] * (h_prev[i] - n[i]);
            dh_prev[i] = dh[i] * z[i];
            dn_pre[i] = dn * (1.0 - n[i] * n[i]);
            dz_pre[i] = dz * z[i] * (1.0 - z[i]);
            rh[i] = r[i] * h_prev[i];
        }
        drh.iter_mut().for_each(|v| *v = 0.0);
        matvec_t_acc(un, &dn_pre, &mut drh);
        for i in 0..hsz {
            let dr = drh[i] * h_prev[i];
            dh_prev[i] += drh[i] * r[i];
            dr_pre[i] = dr * r[i] * (1.0 - r[i]);
        }
        matvec_t_acc(uz, &dz_pre, &mut dh_prev);
        matvec_t_acc(ur, &dr_pre, &mut dh_prev);

        outer_acc(grads.block_mut(Block::UN), &dn_pre, &rh);
        outer_acc(grads.block_mut(Block::UZ), &dz_pre, h_prev);
        outer_acc(grads.block_mut(Block::UR), &dr_pre, h_prev);
        for (block_w, block_b, d) in [
            (Block::WN, Block::BN, &dn_pre),
            (Block::WZ, Block::BZ, &dz_pre),
            (Block::WR, Block::BR, &dr_pre),
        ] {
            for (g, di) in grads.block_mut(block_w).iter_mut().zip(d.iter()) {
                *g += di * x;
            }
            for (g, di) in grads.block_mut(block_b).iter_mut().zip(d.iter()) {
                *g += di;
            }
        }
        dh = dh_prev;
    }
    Ok(grads)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    L1,
    LogL1,
    Bce,
}

impl LossKind {
    const LOG_EPS: f64 = 1e-12;

    pub fn value(self, pred: f64, target: f64) -> f64 {
        match self {
            LossKind::L1 => (pred - target).abs(),
            LossKind::LogL1 => {
                (pred.max(Self::LOG_EPS).ln() - target.max(Self::LOG_EPS).ln()).abs()
            }
            LossKind::Bce => {
                let p = pred.clamp(Self::LOG_EPS, 1.0 - Self::LOG_EPS);
                -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
            }
        }
    }

    /// `dLoss/dPrediction`; the subgradient at a kink is 0.
    pub fn gradient(self, pred: f64, target: f64) -> f64 {
        let sign = |v: f64| {
            if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            }
        };
        match self {
            LossKind::L1 => sign(pred - target),
            LossKind::LogL1 => {
                let p = pred.max(Self::LOG_EPS);
                sign(p.ln() - target.max(Self::LOG_EPS).ln()) / p
            }
            LossKind::Bce => {
                let p = pred.clamp(Self::LOG_EPS, 1.0 - Self::LOG_EPS);
                (p - target) / (p * (1.0 - p))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub hidden: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 128,
            epochs: 100,
            seed: 0,
            loss: LossKind::L1,
            hidden: DEFAULT_HIDDEN,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), GruError> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(GruError::InvalidConfig("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(GruError::InvalidConfig("batch size must be at least 1"));
        }
        if self.hidden == 0 {
            return Err(GruError::InvalidConfig("hidden size must be at least 1"));
        }
        Ok(())
    }
}

/// Trained parameters plus the number of SGD updates applied to them.
#[derive(Debug, Clone, PartialEq)]
pub struct GruModel {
    pub params: GruParams,
    pub steps: u64,
}

impl GruModel {
    pub fn untrained(params: GruParams) -> Self {
        Self { params, steps: 0 }
    }

    pub fn predict(&self, sequence: &[f64]) -> Result<f64, GruError> {
        if self.steps == 0 {
            return Err(GruError::NotTrained);
        }
        Ok(gru_forward(&self.params, sequence)?.0)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format_version: CHECKPOINT_FORMAT_VERSION,
            hidden: self.params.hidden,
            steps: self.steps,
            weights: Block::ALL
                .iter()
                .map(|b| (b.name().to_string(), self.params.block(*b).to_vec()))
                .collect(),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, GruError> {
        if ck.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(GruError::UnsupportedVersion(ck.format_version));
        }
        let mut data = Vec::with_capacity(GruParams::parameter_count(ck.hidden));
        for b in Block::ALL {
            let (name, values) = ck
                .weights
                .iter()
                .find(|(n, _)| n == b.name())
                .ok_or_else(|| GruError::ShapeMismatch(format!("missing block {}", b.name())))?;
            if values.len() != b.len(ck.hidden) {
                return Err(GruError::ShapeMismatch(format!(
                    "block {name} has {} values",
                    values.len()
                )));
            }
            data.extend_from_slice(values);
        }
        Ok(Self {
            params: GruParams::from_flat(ck.hidden, data)?,
            steps: ck.steps,
        })
    }
}

/// Versioned JSON form of a [`GruModel`]. Weight blocks keep storage order;
/// `u_*` matrices are row-major `H×H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub hidden: usize,
    pub steps: u64,
    pub weights: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: GruModel,
    /// Mean mini-batch loss per epoch.
    pub epoch_losses: Vec<f64>,
}

/// Loss and gradient of one example.
fn example_gradient(
    params: &GruParams,
    seq: &[f64],
    target: f64,
    loss: LossKind,
) -> Result<(f64, GruParams), GruError> {
    let (pred, cache) = gru_forward(params, seq)?;
    let grads = gru_backward(params, &cache, loss.gradient(pred, target))?;
    Ok((loss.value(pred, target), grads))
}

/// Mini-batch SGD. The example order is reshuffled every epoch from a ChaCha8
/// stream seeded with `config.seed`, so runs are reproducible. Batch
/// gradients are reduced in example order regardless of thread count.
pub fn train(config: &TrainConfig, dataset: &[(Vec<f64>, f64)]) -> Result<TrainOutcome, GruError> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(GruError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init_seed: u64 = rng.random();
    let mut model = GruModel::untrained(GruParams::init(config.hidden, init_seed));
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let per_example = batch
                .par_iter()
                .map(|&i| example_gradient(&model.params, &dataset[i].0, dataset[i].1, config.loss))
                .collect::<Result<Vec<_>, _>>()?;
            let mut grad = GruParams::zeros(config.hidden);
            for (l, g) in &per_example {
                loss_sum += l;
                grad.add_scaled(g, 1.0);
            }
            model
                .params
                .add_scaled(&grad, -config.learning_rate / batch.len() as f64);
            model.steps += 1;
        }
        if !model.params.is_finite() {
            return Err(GruError::NonFinite);
        }
        epoch_losses.push(loss_sum / dataset.len() as f64);
    }
    Ok(TrainOutcome {
        model,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_predict_half() {
        let p = GruParams::zeros(8);
        let (y, _) = gru_forward(&p, &[0.3, -1.0, 2.0]).unwrap();
        assert_eq!(y, 0.5);
    }

    #[test]
    fn empty_sequence_is_rejected() {
        assert_eq!(
            gru_forward(&GruParams::zeros(4), &[]).unwrap_err(),
            GruError::EmptySequence
        );
    }

    #[test]
    fn hand_recurrence_hidden_one() {
        // Independent evaluation of the recurrence for H = 1.
        let mut p = GruParams::zeros(1);
        let set = |p: &mut GruParams, b: Block, v: f64| p.block_mut(b)[0] = v;
        set(&mut p, Block::WZ, 0.5);
        set(&mut p, Block::UZ, -0.3);
        set(&mut p, Block::BZ, 0.1);
        set(&mut p, Block::WR, -0.4);
        set(&mut p, Block::UR, 0.7);
        set(&mut p, Block::BR, 0.2);
        set(&mut p, Block::WN, 1.1);
        set(&mut p, Block::UN, 0.6);
        set(&mut p, Block::BN, -0.05);
        set(&mut p, Block::WOut, 1.5);
        set(&mut p, Block::BOut, -0.2);
        let s = |x: f64| 1.0 / (1.0 + (-x).exp());
        let x = 0.8;
        let mut h = 0.0_f64;
        for _ in 0..3 {
            let z = s(0.5 * x - 0.3 * h + 0.1);
            let r = s(-0.4 * x + 0.7 * h + 0.2);
            let n = (1.1 * x + 0.6 * r * h - 0.05).tanh();
            h = (1.0 - z) * n + z * h;
        }
        let expected = s(1.5 * h - 0.2);
        let (y, cache) = gru_forward(&p, &[x; 3]).unwrap();
        assert!((y - expected).abs() < 1e-15);
        assert!((cache.final_state()[0] - h).abs() < 1e-15);
    }

    #[test]
    fn zero_loss_gradient_gives_zero_grads() {
        let p = GruParams::init(5, 3);
        let (_, cache) = gru_forward(&p, &[0.1, 0.2, 0.3]).unwrap();
        let g = gru_backward(&p, &cache, 0.0).unwrap();
        assert!(g.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn backward_rejects_foreign_cache() {
        let (_, cache) = gru_forward(&GruParams::init(3, 1), &[0.5]).unwrap();
        assert!(matches!(
            gru_backward(&GruParams::init(4, 1), &cache, 1.0),
            Err(GruError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn output_head_gradient_is_dense() {
        let p = GruParams::init(6, 9);
        let (_, cache) = gru_forward(&p, &[0.4, 0.9, 0.1]).unwrap();
        let g = gru_backward(&p, &cache, 1.0).unwrap();
        assert!(g.block(Block::WOut).iter().all(|v| *v != 0.0));
        assert!(g.block(Block::BOut)[0] != 0.0);
    }

    #[test]
    fn long_sequences_stay_finite() {
        let p = GruParams::init(DEFAULT_HIDDEN, 2);
        for len in [1usize, 10, 100, 300] {
            let seq: Vec<f64> = (0..len).map(|i| (i as f64 * 0.37).sin()).collect();
            let (y, cache) = gru_forward(&p, &seq).unwrap();
            assert!(y.is_finite() && y > 0.0 && y < 1.0);
            let g = gru_backward(&p, &cache, 1.0).unwrap();
            assert!(g.is_finite());
        }
    }

    #[test]
    fn checkpoint_round_trip_preserves_predictions() {
        let model = GruModel {
            params: GruParams::init(7, 5),
            steps: 12,
        };
        let json = serde_json::to_string(&model.to_checkpoint()).unwrap();
        let back = GruModel::from_checkpoint(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, model);
        let seq = [0.2, 0.5, 0.1];
        assert_eq!(back.predict(&seq).unwrap(), model.predict(&seq).unwrap());
    }

    #[test]
    fn checkpoint_version_is_checked() {
        let mut ck = GruModel {
            params: GruParams::init(2, 5),
            steps: 1,
        }
        .to_checkpoint();
        ck.format_version = 99;
        assert_eq!(
            GruModel::from_checkpoint(&ck).unwrap_err(),
            GruError::UnsupportedVersion(99)
        );
    }

    #[test]
    fn untrained_model_refuses_to_predict() {
        let m = GruModel::untrained(GruParams::init(4, 0));
        assert_eq!(m.predict(&[0.1]).unwrap_err(), GruError::NotTrained);
        // the raw forward pass is still defined
        let (y, _) = gru_forward(&m.params, &[0.1]).unwrap();
        assert!(y > 0.0 && y < 1.0);
    }

    #[test]
    fn train_rejects_bad_inputs() {
        let cfg = TrainConfig::default();
        assert_eq!(train(&cfg, &[]).unwrap_err(), GruError::EmptyDataset);
        let bad = TrainConfig {
            batch_size: 0,
            ..cfg
        };
        assert!(matches!(
            train(&bad, &[(vec![0.1], 0.5)]),
            Err(GruError::InvalidConfig(_))
        ));
    }

    #[test]
    fn training_is_deterministic() {
        let data: Vec<(Vec<f64>, f64)> = (0..20)
            .map(|i| {
                let v = i as f64 / 20.0;
                (vec![v, v * 0.5, v * 0.25], 0.2 + 0.5 * v)
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 5,
            batch_size: 4,
            hidden: 6,
            learning_rate: 0.05,
            seed: 77,
            ..TrainConfig::default()
        };
        let a = train(&cfg, &data).unwrap();
        let b = train(&cfg, &data).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model.steps, 25);
    }

    #[test]
    fn loss_gradients_match_finite_differences() {
        for loss in [LossKind::L1, LossKind::LogL1, LossKind::Bce] {
            for (p, t) in [(0.3, 0.6), (0.8, 0.2)] {
                let eps = 1e-7;
                let fd = (loss.value(p + eps, t) - loss.value(p - eps, t)) / (2.0 * eps);
                assert!((fd - loss.gradient(p, t)).abs() < 1e-5, "{loss:?}");
            }
        }
    }
}
