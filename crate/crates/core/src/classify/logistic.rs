//! Logistic regression fitted by full-batch gradient descent.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_samples, class_counts, LabeledSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once the gradient max-norm falls below this.
    pub tolerance: f64,
    /// Coefficient of `||w||^2 / 2`; the bias is not penalised.
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1.0,
            max_iters: 20_000,
            tolerance: 1e-6,
            l2: 1e-3,
        }
    }
}

/// Per-feature affine map to zero mean and unit variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardization {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let dim = rows.first().map_or(0, |r| r.len());
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; dim];
        for r in rows {
            for ((s, v), m) in scale.iter_mut().zip(r.iter()).zip(&mean) {
                *s += (v - m) * (v - m) / n;
            }
        }
        for s in &mut scale {
            *s = libm::sqrt(*s);
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }
        Self { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Weights in standardized feature space.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardization: Standardization,
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let z = self.standardization.apply(x);
        sigmoid(dot(&self.weights, &z) + self.bias)
    }
}

/// Outcome of [`fit_logistic`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub model: LogisticModel,
    /// Loss after every accepted step, starting with the initial loss.
    pub loss_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub grad_max_norm: f64,
}

pub fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    }
}

/// `log(1 + e^s)` without overflow.
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + libm::log1p(libm::exp(-s))
    } else {
        libm::log1p(libm::exp(s))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean cross-entropy plus `l2 * ||w||^2 / 2` and its gradient.
///
/// `params` holds the weights followed by the bias; `rows` are already
/// standardized and `targets` are 0/1.
pub fn loss_and_gradient(params: &[f64], rows: &[Vec<f64>], targets: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let dim = params.len() - 1;
    let (w, b) = (&params[..dim], params[dim]);
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; dim + 1];
    for (x, &y) in rows.iter().zip(targets) {
        let s = dot(w, x) + b;
        loss += softplus(s) - y * s;
        let err = sigmoid(s) - y;
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += err * xi;
        }
        grad[dim] += err;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    loss += l2 * dot(w, w) / 2.0;
    for (g, wi) in grad.iter_mut().zip(w) {
        *g += l2 * wi;
    }
    (loss, grad)
}

/// Gradient descent from zero. A step that would raise the loss is halved
/// until it does not, so the loss sequence never increases.
pub fn fit_logistic(samples: &[LabeledSample], config: &LogisticConfig) -> Result<LogisticFit> {
    let dim = check_samples(samples)?;
    let (pos, neg) = class_counts(samples);
    if samples.len() < 2 || pos == 0 || neg == 0 {
        return Err(Error::DegenerateFit(format!(
            "logistic fit needs both classes, got {pos} ptosis and {neg} not-ptosis"
        )));
    }
    if !(config.learning_rate > 0.0 && config.l2 >= 0.0 && config.tolerance > 0.0) {
        return Err(Error::param(format!("invalid logistic config {config:?}")));
    }
    let raw: Vec<&[f64]> = samples.iter().map(|s| s.features.as_slice()).collect();
    let standardization = Standardization::fit(&raw);
    let rows: Vec<Vec<f64>> = raw.iter().map(|r| standardization.apply(r)).collect();
    let targets: Vec<f64> = samples.iter().map(|s| s.label.as_u8() as f64).collect();

    let mut params = vec![0.0; dim + 1];
    let (mut loss, mut grad) = loss_and_gradient(&params, &rows, &targets, config.l2);
    let mut history = vec![loss];
    let max_norm = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let mut step = config.learning_rate;
    let mut iterations = 0;
    let mut converged = max_norm(&grad) < config.tolerance;
    while !converged && iterations < config.max_iters {
        iterations += 1;
        let mut accepted = false;
        while step > 1e-18 {
            let candidate: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (c_loss, c_grad) = loss_and_gradient(&candidate, &rows, &targets, config.l2);
            if c_loss <= loss {
                params = candidate;
                loss = c_loss;
                grad = c_grad;
                history.push(loss);
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            break;
        }
        converged = max_norm(&grad) < config.tolerance;
    }
    let bias = params[dim];
    params.truncate(dim);
    Ok(LogisticFit {
        model: LogisticModel {
            weights: params,
            bias,
            standardization,
        },
        loss_history: history,
        iterations,
        converged,
        grad_max_norm: max_norm(&grad),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::Label;

    fn sample(x: &[f64], y: u8) -> LabeledSample {
        LabeledSample::new(x.to_vec(), Label::from_u8(y).unwrap())
    }

    #[test]
    fn zero_weights_give_one_half() {
        let rows = vec![vec![1.0, 2.0], vec![-1.0, 0.5]];
        let (loss, _) = loss_and_gradient(&[0.0, 0.0, 0.0], &rows, &[1.0, 0.0], 0.0);
        assert!((loss - core::f64::consts::LN_2).abs() < 1e-15);
        let model = LogisticModel {
            weights: vec![0.0, 0.0],
            bias: 0.0,
            standardization: Standardization {
                mean: vec![0.0, 0.0],
                scale: vec![1.0, 1.0],
            },
        };
        assert_eq!(model.predict_proba(&[3.0, -7.0]), 0.5);
    }

    #[test]
    fn separable_data_is_fitted_exactly() {
        let data: Vec<LabeledSample> = (0..40)
            .map(|i| {
                let t = i as f64 / 4.0;
                if i % 2 == 0 {
                    sample(&[0.6, 1.0 + t * 0.1, 100.0 - t], 1)
                } else {
                    sample(&[0.4, 4.0 + t * 0.1, 60.0 + t], 0)
                }
            })
            .collect();
        let fit = fit_logistic(
            &data,
            &LogisticConfig {
                l2: 0.01,
                ..LogisticConfig::default()
            },
        )
        .unwrap();
        let correct = data
            .iter()
            .filter(|s| Label::from_bool(fit.model.predict_proba(&s.features) >= 0.5) == s.label)
            .count();
        assert_eq!(correct, data.len());
        assert!(fit.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.converged);
        assert!(fit.grad_max_norm < 1e-6);
    }

    #[test]
    fn rejects_single_class_and_nan() {
        let one = vec![sample(&[1.0], 1), sample(&[2.0], 1)];
        assert!(matches!(
            fit_logistic(&one, &LogisticConfig::default()),
            Err(Error::DegenerateFit(_))
        ));
        let nan = vec![sample(&[f64::NAN], 1), sample(&[2.0], 0)];
        assert!(matches!(
            fit_logistic(&nan, &LogisticConfig::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert_eq!(softplus(800.0), 800.0);
    }
}
