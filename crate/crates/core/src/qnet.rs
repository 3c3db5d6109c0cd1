//! Q-value approximator: a one-hidden-layer perceptron trained with plain SGD.
//!
//! The network maps an encoded observation window to four Q-values, one per
//! [`Action`]. Hidden units use a rectifier, the output layer is linear.
//! Everything runs in `f64`; parameters are plain values, so an update
//! produces a new [`NetworkParams`] rather than mutating a shared one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Action;

/// Output width: one Q-value per action.
pub const OUTPUT_DIM: usize = Action::COUNT;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QnetError {
    #[error("input has length {got}, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("batch size mismatch: {states} states vs {targets} targets")]
    BatchMismatch { states: usize, targets: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("forward cache does not match the batch ({0})")]
    StaleCache(String),
    #[error("gradient shape does not match parameters")]
    ShapeMismatch,
    #[error("non-finite value in {0}; aborting training")]
    NonFinite(&'static str),
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparams(String),
}

pub type Result<T> = std::result::Result<T, QnetError>;

/// Dense affine layer. `weights` is row-major `out_dim x in_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self { in_dim, out_dim, weights: vec![0.0; in_dim * out_dim], biases: vec![0.0; out_dim] }
    }

    #[inline]
    fn row(&self, out: usize) -> &[f64] {
        &self.weights[out * self.in_dim..(out + 1) * self.in_dim]
    }

    fn affine_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, slot) in out.iter_mut().enumerate() {
            *slot = self.biases[o] + dot(self.row(o), x);
        }
    }

    fn same_shape(&self, other: &Layer) -> bool {
        self.in_dim == other.in_dim
            && self.out_dim == other.out_dim
            && self.weights.len() == other.weights.len()
            && self.biases.len() == other.biases.len()
    }

    fn well_formed(&self) -> bool {
        self.weights.len() == self.in_dim * self.out_dim && self.biases.len() == self.out_dim
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weights and biases of the network: `[hidden, output]` layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub hidden: Layer,
    pub output: Layer,
}

/// Same layout as [`NetworkParams`], holding `d loss / d theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub hidden: Layer,
    pub output: Layer,
}

impl Gradient {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            hidden: Layer::zeros(params.hidden.in_dim, params.hidden.out_dim),
            output: Layer::zeros(params.output.in_dim, params.output.out_dim),
        }
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.hidden.values().chain(self.output.values())
    }
}

/// Glorot-uniform weights, zero biases, fully determined by `seed`.
pub fn init_params(input_dim: usize, hidden_dim: usize, seed: u64) -> NetworkParams {
    assert!(input_dim >= 1 && hidden_dim >= 1, "layer dimensions must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer = |in_dim: usize, out_dim: usize| {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.random_range(-limit..=limit)).collect();
        Layer { in_dim, out_dim, weights, biases: vec![0.0; out_dim] }
    };
    let hidden = layer(input_dim, hidden_dim);
    let output = layer(hidden_dim, OUTPUT_DIM);
    NetworkParams { hidden, output }
}

impl NetworkParams {
    pub fn input_dim(&self) -> usize {
        self.hidden.in_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden.out_dim
    }

    pub fn layer_dims(&self) -> [usize; 3] {
        [self.hidden.in_dim, self.hidden.out_dim, self.output.out_dim]
    }

    /// Shapes consistent, output width 4, all entries finite.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !self.hidden.well_formed() || !self.output.well_formed() {
            return Err("layer storage does not match its dimensions".into());
        }
        if self.output.in_dim != self.hidden.out_dim {
            return Err(format!("hidden width {} feeds output expecting {}", self.hidden.out_dim, self.output.in_dim));
        }
        if self.output.out_dim != OUTPUT_DIM {
            return Err(format!("output width {} (expected {OUTPUT_DIM})", self.output.out_dim));
        }
        if !self.is_finite() {
            return Err("non-finite parameter".into());
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }

    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.hidden.values().chain(self.output.values())
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        let NetworkParams { hidden, output } = self;
        hidden.weights.iter_mut().chain(&mut hidden.biases).chain(&mut output.weights).chain(&mut output.biases)
    }

    /// Q-values for a single encoded observation.
    pub fn q_values(&self, x: &[f64]) -> Result<QValues> {
        forward(self, x).map(|(q, _)| q)
    }
}

/// One Q-value per action, indexed in N, E, S, W order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QValues(pub [f64; OUTPUT_DIM]);

impl QValues {
    pub fn get(&self, action: Action) -> f64 {
        self.0[action.index()]
    }

    /// Greedy action; ties go to the lowest index (N before E before S before W).
    pub fn argmax(&self) -> Action {
        let mut best = 0;
        for i in 1..OUTPUT_DIM {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Action::ALL[best]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Activations kept from a forward pass for backprop.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    input_dim: usize,
    hidden_dim: usize,
    /// Hidden pre-activations, `batch x hidden`.
    pre: Vec<f64>,
    /// Hidden activations after the rectifier, `batch x hidden`.
    post: Vec<f64>,
    outputs: Vec<QValues>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn outputs(&self) -> &[QValues] {
        &self.outputs
    }

    pub fn hidden_pre(&self) -> &[f64] {
        &self.pre
    }

    pub fn hidden_post(&self) -> &[f64] {
        &self.post
    }
}

fn check_input(params: &NetworkParams, x: &[f64]) -> Result<()> {
    if x.len() != params.input_dim() {
        return Err(QnetError::DimensionMismatch { expected: params.input_dim(), got: x.len() });
    }
    Ok(())
}

/// Single-sample forward pass.
pub fn forward(params: &NetworkParams, x: &[f64]) -> Result<(QValues, ForwardCache)> {
    let (mut outputs, cache) = forward_batch(params, &[x])?;
    Ok((outputs.remove(0), cache))
}

/// Forward pass over a batch of encoded observations.
pub fn forward_batch<S: AsRef<[f64]>>(params: &NetworkParams, states: &[S]) -> Result<(Vec<QValues>, ForwardCache)> {
    let hidden_dim = params.hidden_dim();
    let mut pre = vec![0.0; states.len() * hidden_dim];
    let mut post = vec![0.0; states.len() * hidden_dim];
    let mut outputs = Vec::with_capacity(states.len());
    for (b, state) in states.iter().enumerate() {
        let x = state.as_ref();
        check_input(params, x)?;
        let z = &mut pre[b * hidden_dim..(b + 1) * hidden_dim];
        params.hidden.affine_into(x, z);
        let h = &mut post[b * hidden_dim..(b + 1) * hidden_dim];
        for (hv, &zv) in h.iter_mut().zip(z.iter()) {
            *hv = zv.max(0.0);
        }
        let mut q = [0.0; OUTPUT_DIM];
        params.output.affine_into(h, &mut q);
        outputs.push(QValues(q));
    }
    let cache = ForwardCache { input_dim: params.input_dim(), hidden_dim, pre, post, outputs: outputs.clone() };
    Ok((outputs, cache))
}

fn check_batch<S, T>(states: &[S], targets: &[T]) -> Result<()> {
    if states.len() != targets.len() {
        return Err(QnetError::BatchMismatch { states: states.len(), targets: targets.len() });
    }
    if states.is_empty() {
        return Err(QnetError::EmptyBatch);
    }
    Ok(())
}

fn mse(outputs: &[QValues], targets: &[QValues]) -> f64 {
    let total: f64 = outputs
        .iter()
        .zip(targets)
        .map(|(q, t)| q.0.iter().zip(&t.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    total / outputs.len() as f64
}

/// Batch mean of the squared error summed over the four outputs.
pub fn loss<S: AsRef<[f64]>>(params: &NetworkParams, states: &[S], targets: &[QValues]) -> Result<f64> {
    check_batch(states, targets)?;
    let (outputs, _) = forward_batch(params, states)?;
    Ok(mse(&outputs, targets))
}

/// Analytic gradient of [`loss`] given the cache from [`forward_batch`].
pub fn backward<S: AsRef<[f64]>>(
    params: &NetworkParams,
    states: &[S],
    targets: &[QValues],
    cache: &ForwardCache,
) -> Result<Gradient> {
    check_batch(states, targets)?;
    if cache.batch_size() != states.len() {
        return Err(QnetError::StaleCache(format!("cache holds {} samples, batch has {}", cache.batch_size(), states.len())));
    }
    if cache.input_dim != params.input_dim() || cache.hidden_dim != params.hidden_dim() {
        return Err(QnetError::StaleCache("layer dimensions differ".into()));
    }
    let hidden_dim = params.hidden_dim();
    let input_dim = params.input_dim();
    let scale = 2.0 / states.len() as f64;
    let mut grad = Gradient::zeros_like(params);
    let mut d_hidden = vec![0.0; hidden_dim];
    for (b, state) in states.iter().enumerate() {
        let x = state.as_ref();
        check_input(params, x)?;
        let h = &cache.post[b * hidden_dim..(b + 1) * hidden_dim];
        let z = &cache.pre[b * hidden_dim..(b + 1) * hidden_dim];
        let d_out: [f64; OUTPUT_DIM] = std::array::from_fn(|o| scale * (cache.outputs[b].0[o] - targets[b].0[o]));
        d_hidden.fill(0.0);
        for (o, &d) in d_out.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad.output.biases[o] += d;
            let g_row = &mut grad.output.weights[o * hidden_dim..(o + 1) * hidden_dim];
            for (g, &hv) in g_row.iter_mut().zip(h) {
                *g += d * hv;
            }
            for (dh, &w) in d_hidden.iter_mut().zip(params.output.row(o)) {
                *dh += d * w;
            }
        }
        for (j, dh) in d_hidden.iter().enumerate() {
            // Rectifier derivative, taken as 0 at the kink.
            if z[j] <= 0.0 || *dh == 0.0 {
                continue;
            }
            grad.hidden.biases[j] += dh;
            let g_row = &mut grad.hidden.weights[j * input_dim..(j + 1) * input_dim];
            for (g, &xv) in g_row.iter_mut().zip(x) {
                *g += dh * xv;
            }
        }
    }
    Ok(grad)
}

/// `theta - alpha * grad`.
pub fn sgd_step(params: &NetworkParams, grad: &Gradient, alpha: f64) -> Result<NetworkParams> {
    if !params.hidden.same_shape(&grad.hidden) || !params.output.same_shape(&grad.output) {
        return Err(QnetError::ShapeMismatch);
    }
    let mut next = params.clone();
    for (p, g) in next.values_mut().zip(grad.values()) {
        *p -= alpha * g;
    }
    Ok(next)
}

/// One aggregated SGD update on a minibatch. Returns the new parameters and
/// the loss measured before the update.
pub fn train_minibatch<S: AsRef<[f64]>>(
    params: &NetworkParams,
    states: &[S],
    targets: &[QValues],
    alpha: f64,
) -> Result<(NetworkParams, f64)> {
    check_batch(states, targets)?;
    let (outputs, cache) = forward_batch(params, states)?;
    let pre_loss = mse(&outputs, targets);
    if !pre_loss.is_finite() {
        return Err(QnetError::NonFinite("loss"));
    }
    let grad = backward(params, states, targets, &cache)?;
    let next = sgd_step(params, &grad, alpha)?;
    if !next.is_finite() {
        return Err(QnetError::NonFinite("parameters"));
    }
    Ok((next, pre_loss))
}

/// Training hyperparameters shared by the actor and the learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: u64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub hidden_size: usize,
    /// Step cap per episode; `None` means `10 * (width + height)`.
    pub max_episode_steps: Option<usize>,
    /// Experiences required before the learner starts; `None` means `batch_size`.
    pub warmup_experiences: Option<usize>,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            epsilon_decay_steps: 10_000,
            batch_size: 32,
            replay_capacity: 10_000,
            hidden_size: 128,
            max_episode_steps: None,
            warmup_experiences: None,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QnetError::InvalidHyperparams(msg));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(0.0 <= self.epsilon_end && self.epsilon_end <= self.epsilon_start && self.epsilon_start <= 1.0) {
            return bad(format!(
                "need 0 <= epsilon_end <= epsilon_start <= 1, got {} and {}",
                self.epsilon_end, self.epsilon_start
            ));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if self.replay_capacity < self.batch_size {
            return bad(format!("replay_capacity {} below batch_size {}", self.replay_capacity, self.batch_size));
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be at least 1".into());
        }
        if self.max_episode_steps == Some(0) {
            return bad("max_episode_steps must be at least 1".into());
        }
        Ok(())
    }

    pub fn max_steps_for(&self, width: usize, height: usize) -> usize {
        self.max_episode_steps.unwrap_or(10 * (width + height))
    }

    pub fn warmup(&self) -> usize {
        self.warmup_experiences.unwrap_or(self.batch_size).max(self.batch_size)
    }

    /// Linear decay from `epsilon_start` to `epsilon_end`, then constant.
    pub fn epsilon_at(&self, global_step: u64) -> f64 {
        if global_step >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let progress = global_step as f64 / self.epsilon_decay_steps as f64;
        (self.epsilon_start - (self.epsilon_start - self.epsilon_end) * progress).max(self.epsilon_end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_network() -> NetworkParams {
        NetworkParams {
            hidden: Layer { in_dim: 2, out_dim: 2, weights: vec![1.0, 2.0, -1.0, 0.5], biases: vec![0.5, 0.25] },
            output: Layer {
                in_dim: 2,
                out_dim: 4,
                weights: vec![1.0, 0.0, 0.0, 1.0, 2.0, -1.0, -3.0, 4.0],
                biases: vec![0.0, 0.1, -0.2, 0.3],
            },
        }
    }

    #[test]
    fn init_is_glorot_and_deterministic() {
        let p = init_params(9, 16, 5);
        assert_eq!(p, init_params(9, 16, 5));
        assert_ne!(p, init_params(9, 16, 6));
        assert!(p.hidden.biases.iter().chain(&p.output.biases).all(|&b| b == 0.0));
        let l1 = (6.0f64 / 25.0).sqrt();
        let l2 = (6.0f64 / 20.0).sqrt();
        assert!(p.hidden.weights.iter().all(|w| w.abs() <= l1));
        assert!(p.output.weights.iter().all(|w| w.abs() <= l2));
        assert_eq!(p.layer_dims(), [9, 16, 4]);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = NetworkParams { hidden: Layer::zeros(3, 5), output: Layer::zeros(5, 4) };
        let (q, _) = forward(&p, &[0.3, -1.0, 0.9]).unwrap();
        assert_eq!(q, QValues([0.0; 4]));
    }

    #[test]
    fn hand_built_network() {
        // x = (1, -0.5): z = (1 - 1 + 0.5, -1 - 0.25 + 0.25) = (0.5, -1), h = (0.5, 0)
        // q = (0.5, 0.1, 2*0.5 - 0.2, -3*0.5 + 0.3) = (0.5, 0.1, 0.8, -1.2)
        let (q, cache) = forward(&hand_network(), &[1.0, -0.5]).unwrap();
        let expected = [0.5, 0.1, 0.8, -1.2];
        for (a, b) in q.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{q:?}");
        }
        assert_eq!(cache.hidden_pre(), &[0.5, -1.0]);
        assert_eq!(cache.hidden_post(), &[0.5, 0.0]);
        let (again, _) = forward(&hand_network(), &[1.0, -0.5]).unwrap();
        assert_eq!(q, again);
    }

    #[test]
    fn forward_rejects_wrong_length() {
        let p = init_params(9, 4, 0);
        assert_eq!(forward(&p, &[0.0; 8]).unwrap_err(), QnetError::DimensionMismatch { expected: 9, got: 8 });
    }

    #[test]
    fn loss_examples() {
        let p = NetworkParams {
            hidden: Layer::zeros(1, 1),
            output: Layer { in_dim: 1, out_dim: 4, weights: vec![0.0; 4], biases: vec![1.0, 0.0, 0.0, 0.0] },
        };
        let l = loss(&p, &[[0.0]], &[QValues([3.0, 0.0, 0.0, 0.0])]).unwrap();
        assert_eq!(l, 4.0);
        let q = p.q_values(&[0.0]).unwrap();
        assert_eq!(loss(&p, &[[0.0]], &[q]).unwrap(), 0.0);
        assert_eq!(loss(&p, &[[0.0], [1.0]], &[q]).unwrap_err(), QnetError::BatchMismatch { states: 2, targets: 1 });
        assert_eq!(loss::<[f64; 1]>(&p, &[], &[]).unwrap_err(), QnetError::EmptyBatch);
    }

    #[test]
    fn gradient_vanishes_at_targets() {
        let p = init_params(3, 6, 2);
        let states = vec![vec![0.1, 0.5, -1.0], vec![1.0, 0.0, 0.3]];
        let (q, cache) = forward_batch(&p, &states).unwrap();
        let g = backward(&p, &states, &q, &cache).unwrap();
        assert!(g.values().all(|&v| v == 0.0));
    }

    #[test]
    fn stale_cache_is_rejected() {
        let p = init_params(3, 6, 2);
        let states = vec![vec![0.1, 0.5, -1.0], vec![1.0, 0.0, 0.3]];
        let (q, _) = forward_batch(&p, &states).unwrap();
        let (_, small_cache) = forward_batch(&p, &states[..1]).unwrap();
        assert!(matches!(backward(&p, &states, &q, &small_cache), Err(QnetError::StaleCache(_))));
        let other = init_params(3, 5, 2);
        let (_, other_cache) = forward_batch(&other, &states).unwrap();
        assert!(matches!(backward(&p, &states, &q, &other_cache), Err(QnetError::StaleCache(_))));
    }

    #[test]
    fn sgd_step_arithmetic() {
        let p = NetworkParams { hidden: Layer::zeros(1, 1), output: Layer::zeros(1, 4) };
        let mut theta = p.clone();
        theta.hidden.weights[0] = 2.0;
        let mut grad = Gradient::zeros_like(&p);
        grad.hidden.weights[0] = 0.5;
        let next = sgd_step(&theta, &grad, 1.0).unwrap();
        assert_eq!(next.hidden.weights[0], 1.5);
        assert_eq!(sgd_step(&theta, &Gradient::zeros_like(&p), 0.3).unwrap(), theta);
        let wrong = Gradient::zeros_like(&init_params(2, 1, 0));
        assert_eq!(sgd_step(&theta, &wrong, 1.0).unwrap_err(), QnetError::ShapeMismatch);
    }

    #[test]
    fn argmax_breaks_ties_in_action_order() {
        assert_eq!(QValues([0.1, 0.9, 0.2, 0.3]).argmax(), Action::East);
        assert_eq!(QValues([0.5, 0.5, 0.1, 0.1]).argmax(), Action::North);
        assert_eq!(QValues([0.0, 0.2, 0.2, 0.2]).argmax(), Action::East);
        assert_eq!(QValues([0.0, 0.2, 0.2, 0.7]).max(), 0.7);
    }

    #[test]
    fn train_minibatch_reports_non_finite() {
        let p = init_params(2, 3, 0);
        let err = train_minibatch(&p, &[[1.0, 1.0]], &[QValues([f64::NAN; 4])], 0.1).unwrap_err();
        assert_eq!(err, QnetError::NonFinite("loss"));
        let err = train_minibatch(&p, &[[1.0, 1.0]], &[QValues([1e300; 4])], 1e300).unwrap_err();
        assert!(matches!(err, QnetError::NonFinite(_)));
    }

    #[test]
    fn epsilon_schedule() {
        let h = Hyperparams { epsilon_start: 1.0, epsilon_end: 0.1, epsilon_decay_steps: 100, ..Default::default() };
        assert_eq!(h.epsilon_at(0), 1.0);
        assert!((h.epsilon_at(50) - 0.55).abs() < 1e-12);
        assert_eq!(h.epsilon_at(100), 0.1);
        assert_eq!(h.epsilon_at(10_000), 0.1);
        let mut prev = f64::INFINITY;
        for t in 0..200 {
            let e = h.epsilon_at(t);
            assert!(e <= prev && (0.1..=1.0).contains(&e));
            prev = e;
        }
        let instant = Hyperparams { epsilon_decay_steps: 0, ..h };
        assert_eq!(instant.epsilon_at(0), 0.1);
    }

    #[test]
    fn hyperparams_validation() {
        assert!(Hyperparams::default().validate().is_ok());
        let cases = [
            Hyperparams { gamma: 1.0, ..Default::default() },
            Hyperparams { gamma: 0.0, ..Default::default() },
            Hyperparams { alpha: 0.0, ..Default::default() },
            Hyperparams { epsilon_end: 0.5, epsilon_start: 0.4, ..Default::default() },
            Hyperparams { epsilon_start: 1.5, ..Default::default() },
            Hyperparams { batch_size: 0, ..Default::default() },
            Hyperparams { replay_capacity: 8, batch_size: 16, ..Default::default() },
        ];
        for h in cases {
            assert!(h.validate().is_err(), "{h:?}");
        }
        let h = Hyperparams::default();
        assert_eq!(h.max_steps_for(10, 10), 200);
        assert_eq!(h.warmup(), 32);
    }
}
