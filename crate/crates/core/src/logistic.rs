//! Binary logistic regression fitted by full-batch gradient descent.
//!
//! Features are min-max normalized to `[0, 1]` with the domain bounds before
//! fitting and prediction. Labels must be `-1` or `+1`.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{InputDomain, LabeledDataset, PointInput};
use crate::error::{Error, Result};
use crate::model::{Alphabet, Classifier, Label, ModelError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    bounds: Vec<(i64, i64)>,
    weights: Vec<f64>,
    bias: f64,
    alphabet: Alphabet,
}

impl LogisticModel {
    /// Builds a model from explicit parameters; `weights` apply to normalized
    /// features.
    pub fn from_parts(domain: &InputDomain, weights: Vec<f64>, bias: f64) -> Result<Self> {
        Self::from_bounds(
            domain.params().iter().map(|p| (p.min_value, p.max_value)).collect(),
            weights,
            bias,
        )
    }

    pub fn from_bounds(bounds: Vec<(i64, i64)>, weights: Vec<f64>, bias: f64) -> Result<Self> {
        if bounds.len() != weights.len() {
            return Err(Error::Spec(alloc::format!(
                "{} weights for {} parameters",
                weights.len(),
                bounds.len()
            )));
        }
        if bounds.iter().any(|(lo, hi)| lo > hi) {
            return Err(Error::Spec("inverted normalization bound".to_string()));
        }
        if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Spec("non-finite logistic parameter".to_string()));
        }
        Ok(Self {
            bounds,
            weights,
            bias,
            alphabet: Alphabet::binary(),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn bounds(&self) -> &[(i64, i64)] {
        &self.bounds
    }

    /// The linear score `w · x̂ + b`.
    pub fn decision(&self, input: &PointInput) -> f64 {
        let x = normalize(&self.bounds, input);
        self.bias + dot(&self.weights, &x)
    }
}

impl Classifier for LogisticModel {
    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn predict(&self, input: &PointInput) -> Result<Label, ModelError> {
        if input.len() != self.bounds.len() {
            return Err(ModelError::Protocol(alloc::format!(
                "input arity {} != model arity {}",
                input.len(),
                self.bounds.len()
            )));
        }
        Ok(if self.decision(input) >= 0.0 {
            Label::POSITIVE
        } else {
            Label::NEGATIVE
        })
    }
}

fn normalize(bounds: &[(i64, i64)], input: &PointInput) -> Vec<f64> {
    bounds
        .iter()
        .zip(input.values())
        .map(|(&(lo, hi), &v)| {
            if hi == lo {
                0.0
            } else {
                (v - lo) as f64 / (hi - lo) as f64
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

/// Mean logistic loss over a normalized design matrix.
///
/// Parameter vectors are laid out as `[w_0, .., w_{n-1}, b]`.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl LogisticObjective {
    pub fn new(data: &LabeledDataset) -> Result<Self> {
        let bounds: Vec<(i64, i64)> = data
            .domain()
            .params()
            .iter()
            .map(|p| (p.min_value, p.max_value))
            .collect();
        let mut features = Vec::with_capacity(data.len());
        let mut targets = Vec::with_capacity(data.len());
        for (input, label) in data.rows() {
            let y = match *label {
                Label::POSITIVE => 1.0,
                Label::NEGATIVE => -1.0,
                other => return Err(Error::Training(alloc::format!("label {other} outside {{-1, +1}}"))),
            };
            features.push(normalize(&bounds, input));
            targets.push(y);
        }
        Ok(Self { features, targets })
    }

    pub fn dimension(&self) -> usize {
        self.features.first().map_or(0, Vec::len) + 1
    }

    pub fn loss(&self, params: &[f64]) -> f64 {
        let (w, b) = params.split_at(params.len() - 1);
        let n = self.targets.len() as f64;
        self.features
            .iter()
            .zip(&self.targets)
            .map(|(x, y)| softplus(-y * (dot(w, x) + b[0])))
            .sum::<f64>()
            / n
    }

    pub fn gradient(&self, params: &[f64]) -> Vec<f64> {
        let (w, b) = params.split_at(params.len() - 1);
        let n = self.targets.len() as f64;
        let mut grad = alloc::vec![0.0; params.len()];
        for (x, y) in self.features.iter().zip(&self.targets) {
            // d/dz ln(1 + e^{-yz}) = -y σ(-yz)
            let coef = -y * sigmoid(-y * (dot(w, x) + b[0]));
            for (g, xi) in grad.iter_mut().zip(x) {
                *g += coef * xi;
            }
            grad[w.len()] += coef;
        }
        for g in &mut grad {
            *g /= n;
        }
        grad
    }
}

/// Fits a logistic model to `data`.
///
/// Initial weights are drawn uniformly from `[-0.01, 0.01]` using `seed`; the
/// fit is otherwise deterministic. A single-class dataset yields a constant
/// model predicting that class.
pub fn train_logistic(data: &LabeledDataset, params: &LogisticParams) -> Result<LogisticModel> {
    if data.is_empty() {
        return Err(Error::Training("empty dataset".to_string()));
    }
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::Config("learning rate must be positive".to_string()));
    }
    let objective = LogisticObjective::new(data)?;
    let dim = objective.dimension();

    let first = data.rows()[0].1;
    if data.rows().iter().all(|(_, l)| *l == first) {
        let bias = if first == Label::POSITIVE { 1.0 } else { -1.0 };
        return LogisticModel::from_parts(data.domain(), alloc::vec![0.0; dim - 1], bias);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut theta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.01..=0.01)).collect();
    for _ in 0..params.epochs {
        let grad = objective.gradient(&theta);
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= params.learning_rate * g;
        }
    }
    let bias = theta.pop().unwrap_or(0.0);
    LogisticModel::from_parts(data.domain(), theta, bias)
}
