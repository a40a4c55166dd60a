use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SnrSample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::config(format!("unknown activation {other:?}"))),
        }
    }
}

/// Dense layer; `weights` is `out × in`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl Layer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
            in_dim,
            out_dim,
        }
    }

    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.in_dim)
                .zip(&self.biases)
                .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()),
        );
    }
}

/// Feed-forward regressor: hidden layers x_ℓ = φ(W_ℓ x_{ℓ-1} + b_ℓ) and an
/// affine scalar output ŷ = w_Lᵀ x_{L-1} + b_L.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    pub activation: Activation,
    /// Length of the pilot sub-block the input features were computed from;
    /// 0 when unknown.
    pub feature_block_len: usize,
}

/// Gradient of a loss with the same shape as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    fn zeros_like(p: &MlpParams) -> Self {
        Self {
            layers: p
                .layers
                .iter()
                .map(|l| Layer::zeros(l.in_dim, l.out_dim))
                .collect(),
        }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }
}

impl MlpParams {
    /// All-zero parameters for layer sizes `[input, hidden…, 1]`.
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        Self::check_sizes(sizes)?;
        Ok(Self {
            layers: sizes.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
            activation,
            feature_block_len: 0,
        })
    }

    /// He-initialised weights, zero biases.
    pub fn random<R: Rng + ?Sized>(
        sizes: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut p = Self::zeros(sizes, activation)?;
        for l in &mut p.layers {
            let scale = (2.0 / l.in_dim as f64).sqrt();
            for w in &mut l.weights {
                *w = scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
        Ok(p)
    }

    fn check_sizes(sizes: &[usize]) -> Result<()> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::config(format!("invalid layer sizes {sizes:?}")));
        }
        if *sizes.last().unwrap() != 1 {
            return Err(Error::config("the output layer must have one unit"));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// L, the number of affine layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.biases).copied())
            .collect()
    }

    pub fn set_flat(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.num_params());
        let mut it = values.iter();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.biases.iter_mut()) {
                *w = *it.next().unwrap();
            }
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::contract(format!(
                "network expects {} features, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(())
    }

    /// γ̂ for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (j, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if j < last {
                next.iter_mut().for_each(|z| *z = self.activation.apply(*z));
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur[0])
    }

    /// Squared error (ŷ - target)² and its gradient, accumulated into `grad`.
    fn accumulate_gradient(&self, x: &[f64], target: f64, grad: &mut Gradients) -> f64 {
        let last = self.layers.len() - 1;
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        post.push(x.to_vec());
        for (j, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.affine(&post[j], &mut z);
            let a = if j < last {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            } else {
                z.clone()
            };
            pre.push(z);
            post.push(a);
        }
        let err = post[last + 1][0] - target;

        let mut delta = vec![2.0 * err];
        for j in (0..=last).rev() {
            let layer = &self.layers[j];
            let g = &mut grad.layers[j];
            let input = &post[j];
            for (o, &d) in delta.iter().enumerate() {
                g.biases[o] += d;
                let row = &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (w, &v) in row.iter_mut().zip(input) {
                    *w += d * v;
                }
            }
            if j == 0 {
                break;
            }
            let mut back = vec![0.0; layer.in_dim];
            for (o, &d) in delta.iter().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (b, &w) in back.iter_mut().zip(row) {
                    *b += d * w;
                }
            }
            for ((b, &z), &a) in back.iter_mut().zip(&pre[j - 1]).zip(&post[j]) {
                *b *= self.activation.derivative(z, a);
            }
            delta = back;
        }
        err * err
    }

    /// Loss (ŷ - target)² and its gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, x: &[f64], target: f64) -> Result<(f64, Gradients)> {
        self.check_input(x)?;
        let mut g = Gradients::zeros_like(self);
        let loss = self.accumulate_gradient(x, target, &mut g);
        Ok((loss, g))
    }

    pub fn mse(&self, samples: &[SnrSample]) -> Result<f64> {
        let mut acc = 0.0;
        for s in samples {
            acc += (self.forward(&s.features)? - s.label_db).powi(2);
        }
        Ok(acc / samples.len().max(1) as f64)
    }

    /// Writes the parameters as text:
    ///
    /// ```text
    /// onebit-mlp v1
    /// activation relu
    /// sizes 64 64 64 1
    /// feature_block_len 10
    /// <out rows of in weights, one row per line>   # layer 1
    /// <out biases on one line>
    /// …                                            # layers 2..L
    /// ```
    ///
    /// Numbers use shortest round-trip formatting, so reading back is exact.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(fs::File::create(path)?);
        writeln!(out, "onebit-mlp v1")?;
        writeln!(out, "activation {}", self.activation)?;
        let sizes: Vec<String> = self.sizes().iter().map(ToString::to_string).collect();
        writeln!(out, "sizes {}", sizes.join(" "))?;
        writeln!(out, "feature_block_len {}", self.feature_block_len)?;
        for l in &self.layers {
            for row in l.weights.chunks_exact(l.in_dim) {
                write_row(&mut out, row)?;
            }
            write_row(&mut out, &l.biases)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            msg,
        };
        let mut lines = text.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| err(format!("missing {key} line")))?;
            line.strip_prefix(key)
                .map(|r| r.trim().to_string())
                .ok_or_else(|| err(format!("expected {key:?}, found {line:?}")))
        };
        if header("onebit-mlp")? != "v1" {
            return Err(err("unsupported format version".into()));
        }
        let activation: Activation = header("activation")?.parse()?;
        let sizes: Vec<usize> = header("sizes")?
            .split_whitespace()
            .map(|t| t.parse().map_err(|e| err(format!("bad size {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let block: usize = header("feature_block_len")?
            .parse()
            .map_err(|e| err(format!("bad feature_block_len: {e}")))?;
        let mut params = Self::zeros(&sizes, activation)?;
        params.feature_block_len = block;
        let values: Vec<f64> = lines
            .flat_map(str::split_whitespace)
            .map(|t| t.parse().map_err(|e| err(format!("bad number {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        if values.len() != params.num_params() {
            return Err(err(format!(
                "expected {} parameters, found {}",
                params.num_params(),
                values.len()
            )));
        }
        params.set_flat(&values);
        Ok(params)
    }
}

fn write_row(out: &mut impl Write, row: &[f64]) -> std::io::Result<()> {
    let mut first = true;
    for v in row {
        if !first {
            write!(out, " ")?;
        }
        write!(out, "{v:e}")?;
        first = false;
    }
    writeln!(out)
}

/// Settings for [`mlp_train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainHyperparams {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Share of the dataset held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainHyperparams {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            activation: Activation::Relu,
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            validation_fraction: 0.2,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Validation MSE of the untrained network (epoch 0).
    pub initial_val_mse: f64,
    pub best_val_mse: f64,
    pub best_epoch: usize,
    /// Validation MSE after every epoch, starting with epoch 0.
    pub val_history: Vec<f64>,
    pub train_len: usize,
    pub val_len: usize,
}

/// Per-feature affine map applied before the first layer while training.
struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
    label_mean: f64,
    label_scale: f64,
}

impl Standardizer {
    fn fit(samples: &[SnrSample]) -> Self {
        let n = samples.len() as f64;
        let dim = samples[0].features.len();
        let mut mean = vec![0.0; dim];
        for s in samples {
            for (m, v) in mean.iter_mut().zip(&s.features) {
                *m += v / n;
            }
        }
        let mut var = vec![0.0; dim];
        for s in samples {
            for ((q, v), m) in var.iter_mut().zip(&s.features).zip(&mean) {
                *q += (v - m).powi(2) / n;
            }
        }
        let label_mean = samples.iter().map(|s| s.label_db).sum::<f64>() / n;
        let label_var = samples
            .iter()
            .map(|s| (s.label_db - label_mean).powi(2))
            .sum::<f64>()
            / n;
        Self {
            mean,
            scale: var.into_iter().map(|v| v.sqrt().max(1e-6)).collect(),
            label_mean,
            label_scale: label_var.sqrt().max(1e-6),
        }
    }

    fn apply(&self, s: &SnrSample) -> SnrSample {
        SnrSample {
            features: s
                .features
                .iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .map(|((v, m), c)| (v - m) / c)
                .collect(),
            label_db: (s.label_db - self.label_mean) / self.label_scale,
        }
    }

    /// Folds the input and label maps into the first and last layers so the
    /// returned network consumes raw features and emits dB.
    fn fold(&self, mut p: MlpParams) -> MlpParams {
        let first = &mut p.layers[0];
        for o in 0..first.out_dim {
            let row = &mut first.weights[o * first.in_dim..(o + 1) * first.in_dim];
            let mut shift = 0.0;
            for ((w, m), c) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *w /= c;
                shift += *w * m;
            }
            first.biases[o] -= shift;
        }
        let last = p.layers.last_mut().unwrap();
        last.weights.iter_mut().for_each(|w| *w *= self.label_scale);
        last.biases[0] = last.biases[0] * self.label_scale + self.label_mean;
        p
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// Mini-batch Adam on the mean squared error in dB.
///
/// Features and labels are standardized on the training split; the
/// standardization is folded back into the returned parameters. The
/// parameters with the lowest validation MSE seen (epoch 0 included) are
/// returned, so the result never does worse on validation than the
/// initialisation.
pub fn mlp_train(
    dataset: &[SnrSample],
    hyper: &TrainHyperparams,
) -> Result<(MlpParams, TrainReport)> {
    if dataset.is_empty() {
        return Err(Error::contract("cannot train on an empty dataset"));
    }
    let dim = dataset[0].features.len();
    if dataset.iter().any(|s| s.features.len() != dim) {
        return Err(Error::contract("samples have differing feature lengths"));
    }
    if hyper.batch_size == 0 || !(0.0..1.0).contains(&hyper.validation_fraction) {
        return Err(Error::config("invalid batch size or validation fraction"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((dataset.len() as f64 * hyper.validation_fraction).round() as usize)
        .min(dataset.len() - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let train_raw: Vec<SnrSample> = train_idx.iter().map(|&i| dataset[i].clone()).collect();
    // With no validation split the training set doubles as validation.
    let val_raw: Vec<SnrSample> = if n_val == 0 {
        train_raw.clone()
    } else {
        val_idx.iter().map(|&i| dataset[i].clone()).collect()
    };

    let std = Standardizer::fit(&train_raw);
    let train: Vec<SnrSample> = train_raw.iter().map(|s| std.apply(s)).collect();

    let mut sizes = vec![dim];
    sizes.extend(&hyper.hidden);
    sizes.push(1);
    let mut params = MlpParams::random(&sizes, hyper.activation, &mut rng)?;

    let mut best = std.fold(params.clone());
    let initial = best.mse(&val_raw)?;
    let mut report = TrainReport {
        initial_val_mse: initial,
        best_val_mse: initial,
        best_epoch: 0,
        val_history: vec![initial],
        train_len: train.len(),
        val_len: val_raw.len(),
    };

    let mut adam = Adam::new(params.num_params(), hyper.learning_rate);
    let mut flat = params.flat();
    let mut idx: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=hyper.epochs {
        idx.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in idx.chunks(hyper.batch_size) {
            let mut grad = Gradients::zeros_like(&params);
            for &i in batch {
                epoch_loss +=
                    params.accumulate_gradient(&train[i].features, train[i].label_db, &mut grad);
            }
            let scale = 1.0 / batch.len() as f64;
            let g: Vec<f64> = grad.flat().into_iter().map(|v| v * scale).collect();
            adam.step(&mut flat, &g);
            params.set_flat(&flat);
        }
        let epoch_loss = epoch_loss / train.len() as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::Training {
                epoch,
                loss: epoch_loss,
            });
        }
        let candidate = std.fold(params.clone());
        let val = candidate.mse(&val_raw)?;
        if !val.is_finite() {
            return Err(Error::Training { epoch, loss: val });
        }
        report.val_history.push(val);
        if val < report.best_val_mse {
            report.best_val_mse = val;
            report.best_epoch = epoch;
            best = candidate;
        }
    }
    Ok((best, report))
}
