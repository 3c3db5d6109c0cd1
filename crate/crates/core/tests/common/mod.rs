//! Independent reference computations shared by the integration tests.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use saccade::qnet::{self, Gradient, NetworkParams};
use saccade::QValues;
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn flatten(params: &NetworkParams) -> Vec<f64> {
    let mut out = params.hidden.weights.clone();
    out.extend(&params.hidden.biases);
    out.extend(&params.output.weights);
    out.extend(&params.output.biases);
    out
}

pub fn flatten_grad(grad: &Gradient) -> Vec<f64> {
    grad.values().copied().collect()
}

pub fn unflatten(template: &NetworkParams, values: &[f64]) -> NetworkParams {
    let mut params = template.clone();
    let mut it = values.iter().copied();
    for slot in params
        .hidden
        .weights
        .iter_mut()
        .chain(params.hidden.biases.iter_mut())
        .chain(params.output.weights.iter_mut())
        .chain(params.output.biases.iter_mut())
    {
        *slot = it.next().expect("enough values");
    }
    assert!(it.next().is_none());
    params
}

/// Central differences of `qnet::loss` in every coordinate.
pub fn numeric_gradient(params: &NetworkParams, states: &[Vec<f64>], targets: &[QValues], h: f64) -> Vec<f64> {
    let base = flatten(params);
    (0..base.len())
        .map(|i| {
            let mut plus = base.clone();
            plus[i] += h;
            let mut minus = base.clone();
            minus[i] -= h;
            let lp = qnet::loss(&unflatten(params, &plus), states, targets).unwrap();
            let lm = qnet::loss(&unflatten(params, &minus), states, targets).unwrap();
            (lp - lm) / (2.0 * h)
        })
        .collect()
}

pub fn max_relative_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-8))
        .fold(0.0, f64::max)
}

/// Random network with nonzero biases plus a batch of observation-like
/// inputs and arbitrary targets.
pub fn random_instance(rng: &mut ChaCha8Rng, batch: usize) -> (NetworkParams, Vec<Vec<f64>>, Vec<QValues>) {
    let k = [3usize, 5][rng.random_range(0..2)];
    let hidden = rng.random_range(2..24);
    let mut params = qnet::init_params(k * k, hidden, rng.random());
    for b in params.hidden.biases.iter_mut().chain(params.output.biases.iter_mut()) {
        *b = rng.random_range(-0.3..0.3);
    }
    let states = (0..batch)
        .map(|_| {
            (0..k * k)
                .map(|_| if rng.random_bool(0.1) { -1.0 } else { f64::from(rng.random_range(0u8..=9)) / 9.0 })
                .collect()
        })
        .collect();
    let targets = (0..batch).map(|_| QValues(std::array::from_fn(|_| rng.random_range(-1.0..1.0)))).collect();
    (params, states, targets)
}

/// Pearson statistic and its 1 - `alpha` critical value for uniform counts.
pub fn chi_square_uniform(counts: &[u64], alpha: f64) -> (f64, f64) {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).unwrap();
    (stat, dist.inverse_cdf(1.0 - alpha))
}
