//! Feed-forward sigmoid network trained on binary cross entropy.
//!
//! Every hidden neuron computes `σ(w·y + b)`. The single output neuron's
//! pre-activation goes through one sigmoid to give the score `t̃ ∈ (0, 1)`,
//! which after training estimates the posterior probability that the
//! transmitter is outside the region of interest, `p(H1 | a)`.
//!
//! Losses are measured in bits (base-2 logarithms); gradients carry the
//! matching `1 / ln 2` factor.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Scores are clamped to `[EPS, 1 − EPS]` before taking logarithms.
pub const EPS: f64 = 1e-12;

const FORMAT_HEADER: &str = "irlv-mlp v1";

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Flat training matrix: row `i` of `x` (length `dim`) has label `t[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub dim: usize,
    pub x: Vec<f64>,
    pub t: Vec<f64>,
}

impl Samples {
    pub fn new(dim: usize, x: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if dim == 0 || x.len() != dim * t.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * t.len(),
                got: x.len(),
            });
        }
        Ok(Self { dim, x, t })
    }

    pub fn from_dataset(data: &Dataset) -> Self {
        let x = data.samples().iter().flat_map(|s| s.a.iter().copied()).collect();
        let t = data.samples().iter().map(|s| f64::from(s.t)).collect();
        Self {
            dim: data.dim(),
            x,
            t,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    /// Rows `idx` gathered into a new sample set.
    pub fn select(&self, idx: &[usize]) -> Self {
        let x = idx.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        let t = idx.iter().map(|&i| self.t[i]).collect();
        Self {
            dim: self.dim,
            x,
            t,
        }
    }
}

/// Multilayer perceptron with sigmoid units and a single output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    /// Per layer, row-major `out × in`.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

/// Gradient with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradient {
    fn zeros_like(mlp: &Mlp) -> Self {
        Self {
            weights: mlp.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: mlp.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Weights layer by layer, then biases layer by layer.
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .chain(&self.biases)
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    fn scale(&mut self, k: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|g| *g *= k);
        }
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) || *sizes.last().unwrap() != 1 {
        return Err(Error::InvalidParameter(format!(
            "layer sizes {sizes:?}: need >= 2 nonzero layers ending in a single output"
        )));
    }
    Ok(())
}

/// `[inputs, hidden × hidden_layers, 1]`.
pub fn layer_sizes(inputs: usize, hidden: usize, hidden_layers: usize) -> Vec<usize> {
    let mut sizes = vec![inputs];
    sizes.extend(std::iter::repeat_n(hidden, hidden_layers));
    sizes.push(1);
    sizes
}

impl Mlp {
    /// All weights and biases zero.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        check_sizes(sizes)?;
        let weights = sizes.windows(2).map(|w| vec![0.0; w[0] * w[1]]).collect();
        let biases = sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            weights,
            biases,
        })
    }

    /// Glorot-uniform weights in `[−s, s]` with `s = √(6 / (fan_in + fan_out))`,
    /// zero biases.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut mlp = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (l, w) in mlp.weights.iter_mut().enumerate() {
            let s = glorot_limit(sizes[l], sizes[l + 1]);
            w.iter_mut().for_each(|v| *v = rng.random_range(-s..=s));
        }
        Ok(mlp)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().chain(&self.biases).map(Vec::len).sum()
    }

    /// Parameters in [`Gradient::flatten`] order.
    pub fn params(&self) -> Vec<f64> {
        self.weights
            .iter()
            .chain(&self.biases)
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: flat.len(),
            });
        }
        let mut it = flat.iter().copied();
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            v.iter_mut().for_each(|p| *p = it.next().unwrap());
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(&self.biases)
            .all(|v| v.iter().all(|p| p.is_finite()))
    }

    /// Score `t̃(a)` of one feature vector.
    pub fn forward(&self, a: &[f64]) -> Result<f64> {
        if a.len() != self.inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs(),
                got: a.len(),
            });
        }
        let mut ws = Workspace::new(self);
        Ok(self.forward_into(a, &mut ws))
    }

    /// Scores of every row of `samples`.
    pub fn scores(&self, samples: &Samples) -> Result<Vec<f64>> {
        if samples.dim != self.inputs() {
            return Err(Error::DimensionMismatch {
                expected: self.inputs(),
                got: samples.dim,
            });
        }
        let mut ws = Workspace::new(self);
        Ok((0..samples.len())
            .map(|i| self.forward_into(samples.row(i), &mut ws))
            .collect())
    }

    /// Forward pass leaving every layer's activations in `ws`.
    fn forward_into(&self, a: &[f64], ws: &mut Workspace) -> f64 {
        ws.act[0].copy_from_slice(a);
        for l in 0..self.weights.len() {
            let (inp, out) = ws.act.split_at_mut(l + 1);
            let (inp, out) = (&inp[l], &mut out[0]);
            let n_in = inp.len();
            for (k, o) in out.iter_mut().enumerate() {
                let row = &self.weights[l][k * n_in..(k + 1) * n_in];
                let z = row.iter().zip(inp).fold(self.biases[l][k], |acc, (w, y)| acc + w * y);
                *o = sigmoid(z);
            }
        }
        ws.act[self.weights.len()][0]
    }

    /// Accumulates the natural-log cross-entropy gradient of one sample.
    fn accumulate(&self, a: &[f64], t: f64, ws: &mut Workspace, grad: &mut Gradient) {
        let out = self.forward_into(a, ws);
        let last = self.weights.len() - 1;
        ws.delta[last][0] = out - t;
        for l in (0..=last).rev() {
            let n_in = self.sizes[l];
            if l > 0 {
                let (lower, upper) = ws.delta.split_at_mut(l);
                let (below, here) = (&mut lower[l - 1], &upper[0]);
                for (j, d) in below.iter_mut().enumerate() {
                    let back: f64 = here
                        .iter()
                        .enumerate()
                        .map(|(k, dk)| dk * self.weights[l][k * n_in + j])
                        .sum();
                    let y = ws.act[l][j];
                    *d = back * y * (1.0 - y);
                }
            }
            let input = &ws.act[l];
            for (k, dk) in ws.delta[l].iter().enumerate() {
                grad.biases[l][k] += dk;
                let row = &mut grad.weights[l][k * n_in..(k + 1) * n_in];
                row.iter_mut().zip(input).for_each(|(g, y)| *g += dk * y);
            }
        }
    }

    fn apply_step(&mut self, grad: &Gradient, lr: f64) {
        for (p, g) in self
            .weights
            .iter_mut()
            .chain(self.biases.iter_mut())
            .zip(grad.weights.iter().chain(&grad.biases))
        {
            p.iter_mut().zip(g).for_each(|(p, g)| *p -= lr * g);
        }
    }

    /// Versioned text format: header, layer sizes, one line of row-major
    /// weights per layer, one line of biases per layer, all with 17
    /// significant digits.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let join = |v: &[f64]| {
            let mut s = String::new();
            for (k, x) in v.iter().enumerate() {
                if k > 0 {
                    s.push(' ');
                }
                write!(s, "{x:.16e}").unwrap();
            }
            s
        };
        writeln!(w, "{FORMAT_HEADER}")?;
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        writeln!(w, "{}", sizes.join(" "))?;
        for v in self.weights.iter().chain(&self.biases) {
            writeln!(w, "{}", join(v))?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("truncated model file".into()))?
                .map_err(Error::from)
        };
        if next()?.trim() != FORMAT_HEADER {
            return Err(Error::Parse(format!("expected header `{FORMAT_HEADER}`")));
        }
        let sizes = next()?
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let mut mlp = Self::zeros(&sizes)?;
        for v in mlp.weights.iter_mut().chain(mlp.biases.iter_mut()) {
            let line = next()?;
            let parsed = line
                .split_whitespace()
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            if parsed.len() != v.len() {
                return Err(Error::DimensionMismatch {
                    expected: v.len(),
                    got: parsed.len(),
                });
            }
            *v = parsed;
        }
        Ok(mlp)
    }
}

fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

struct Workspace {
    act: Vec<Vec<f64>>,
    delta: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(mlp: &Mlp) -> Self {
        Self {
            act: mlp.sizes.iter().map(|&n| vec![0.0; n]).collect(),
            delta: mlp.sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

/// Mean binary cross entropy in bits, scores clamped to `[EPS, 1 − EPS]`.
pub fn ce_loss(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            got: scores.len(),
        });
    }
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, &t)| {
            let s = s.clamp(EPS, 1.0 - EPS);
            -(t * s.log2() + (1.0 - t) * (1.0 - s).log2())
        })
        .sum();
    Ok(total / scores.len() as f64)
}

/// Exact gradient of [`ce_loss`] (bits) over `batch` with respect to every
/// parameter, ignoring the clamp.
pub fn backward(mlp: &Mlp, batch: &Samples) -> Result<Gradient> {
    if batch.is_empty() {
        return Err(Error::DegenerateDataset("empty batch".into()));
    }
    if batch.dim != mlp.inputs() {
        return Err(Error::DimensionMismatch {
            expected: mlp.inputs(),
            got: batch.dim,
        });
    }
    let mut ws = Workspace::new(mlp);
    let mut grad = Gradient::zeros_like(mlp);
    for i in 0..batch.len() {
        mlp.accumulate(batch.row(i), batch.t[i], &mut ws, &mut grad);
    }
    grad.scale(1.0 / (batch.len() as f64 * std::f64::consts::LN_2));
    Ok(grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds the mini-batch order.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 200,
            batch_size: 128,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, n_samples: usize) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter("learning rate must be positive".into()));
        }
        if self.batch_size == 0 || self.batch_size > n_samples {
            return Err(Error::InvalidParameter(format!(
                "batch size {} must be in 1..={n_samples}",
                self.batch_size
            )));
        }
        Ok(())
    }
}

/// Mini-batch gradient descent on the cross entropy. Returns the trained
/// network and its cross entropy (bits) on the whole training set.
pub fn train(mlp: &Mlp, data: &Samples, config: &TrainConfig) -> Result<(Mlp, f64)> {
    config.validate(data.len())?;
    if data.dim != mlp.inputs() {
        return Err(Error::DimensionMismatch {
            expected: mlp.inputs(),
            got: data.dim,
        });
    }
    let mut net = mlp.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut ws = Workspace::new(&net);
    let mut grad = Gradient::zeros_like(&net);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grad.scale(0.0);
            for &i in batch {
                net.accumulate(data.row(i), data.t[i], &mut ws, &mut grad);
            }
            grad.scale(1.0 / (batch.len() as f64 * std::f64::consts::LN_2));
            net.apply_step(&grad, config.learning_rate);
        }
        if !net.is_finite() {
            return Err(Error::TrainingDiverged);
        }
    }
    let ce = ce_loss(&net.scores(data)?, &data.t)?;
    if ce.is_nan() {
        return Err(Error::TrainingDiverged);
    }
    Ok((net, ce))
}

/// Hard decision: 1 (outside) iff the score exceeds `lambda`.
pub fn decide(score: f64, lambda: f64) -> u8 {
    u8::from(score > lambda)
}

/// Likelihood-ratio threshold equivalent to thresholding the score at
/// `lambda`.
///
/// With `t̃ = p(H1 | a)`, deciding `t̃ > λ` is the same as deciding
/// `p(a | H0) / p(a | H1) < θ` with `θ = (1 − λ)/λ · p(H1)/p(H0)`, which is
/// the ratio-scale threshold of the Neyman-Pearson test (compare `log₂ θ`
/// with the log-likelihood ratio in bits).
pub fn lambda_to_theta(lambda: f64, prior0: f64, prior1: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must lie strictly between 0 and 1"
        )));
    }
    check_priors(prior0, prior1)?;
    Ok((1.0 - lambda) / lambda * prior1 / prior0)
}

/// Posterior probability of H0 given a log-likelihood ratio
/// `log₂ p(a|H0)/p(a|H1)` in bits.
pub fn posterior_from_llr(llr_bits: f64, prior0: f64, prior1: f64) -> Result<f64> {
    check_priors(prior0, prior1)?;
    Ok(1.0 / (1.0 + prior1 / prior0 * (-llr_bits).exp2()))
}

fn check_priors(prior0: f64, prior1: f64) -> Result<()> {
    if !(prior0 > 0.0 && prior1 > 0.0 && (prior0 + prior1 - 1.0).abs() < 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "priors ({prior0}, {prior1}) must be positive and sum to 1"
        )));
    }
    Ok(())
}
