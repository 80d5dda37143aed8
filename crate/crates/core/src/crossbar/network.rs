//! Two-layer binary-neuron network with real weights, trained offline.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, Image, CLASSES, PIXELS};
use crate::error::{Error, Result};

pub const WEIGHTS_SCHEMA: &str = "sotneuron.weights/1";

/// Dense layer: `weights[o * inputs + i]` connects input `i` to output `o`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn random(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        let r = 1.0 / (inputs as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| rng.random_range(-r..r)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.inputs * self.outputs || self.bias.len() != self.outputs {
            return Err(Error::Format(format!(
                "layer {}x{} has {} weights and {} biases",
                self.inputs,
                self.outputs,
                self.weights.len(),
                self.bias.len()
            )));
        }
        if !self.weights.iter().chain(&self.bias).all(|w| w.is_finite()) {
            return Err(Error::Format("non-finite weight".into()));
        }
        Ok(())
    }

    /// Weight on input `i` of output `o`; `i == inputs` is the bias.
    pub fn weight(&self, i: usize, o: usize) -> f64 {
        if i == self.inputs {
            self.bias[o]
        } else {
            self.weights[o * self.inputs + i]
        }
    }

    pub fn preactivation(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.bias[o]
            })
            .collect()
    }
}

/// 64 → hidden → 4. Hidden neurons output 1 iff their input is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloatNetwork {
    pub schema: String,
    pub hidden: DenseLayer,
    pub output: DenseLayer,
    /// Free-form record of how the file was produced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

fn step(z: f64) -> f64 {
    (z > 0.0) as u8 as f64
}

fn pixels(img: &Image) -> Vec<f64> {
    img.iter().map(|&p| p as f64).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (k, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = k;
        }
    }
    best
}

impl FloatNetwork {
    pub fn random(n_hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            schema: WEIGHTS_SCHEMA.into(),
            hidden: DenseLayer::random(PIXELS, n_hidden, &mut rng),
            output: DenseLayer::random(n_hidden, CLASSES, &mut rng),
            provenance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != WEIGHTS_SCHEMA {
            return Err(Error::Format(format!("weight schema {:?}, expected {WEIGHTS_SCHEMA:?}", self.schema)));
        }
        self.hidden.validate()?;
        self.output.validate()?;
        if self.hidden.inputs != PIXELS || self.output.outputs != CLASSES || self.output.inputs != self.hidden.outputs {
            return Err(Error::Format(format!(
                "topology {}-{}-{} / {}-{}, expected {PIXELS}-h / h-{CLASSES}",
                self.hidden.inputs, self.hidden.outputs, self.output.inputs, self.output.inputs, self.output.outputs
            )));
        }
        Ok(())
    }

    pub fn hidden_activity(&self, img: &Image) -> Vec<f64> {
        self.hidden.preactivation(&pixels(img)).into_iter().map(step).collect()
    }

    /// Output-layer preactivations.
    pub fn scores(&self, img: &Image) -> Vec<f64> {
        self.output.preactivation(&self.hidden_activity(img))
    }

    pub fn predict(&self, img: &Image) -> usize {
        argmax(&self.scores(img))
    }

    pub fn accuracy(&self, ds: &Dataset) -> f64 {
        let hits = ds
            .images
            .iter()
            .zip(&ds.labels)
            .filter(|(img, &l)| self.predict(img) == l as usize)
            .count();
        hits as f64 / ds.len().max(1) as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Self = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// What the backward pass sees in place of the binary neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surrogate {
    /// Hard step forward, derivative of a steep sigmoid of the preactivation
    /// backward.
    StraightThrough,
    /// Forward and backward through the firing probability of a stochastic
    /// neuron, a sigmoid of the column drive z / Σ|w|. That ratio is what a
    /// crossbar column turns into current, so the loss rewards drives that
    /// stay far from the noisy region after mapping to hardware.
    MeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainParams {
    pub surrogate: Surrogate,
    /// Sigmoid slope for the mean-field surrogate, per unit of z / Σ|w|. A
    /// column delivers about Gs·Vs·z/Σ|w| of current, so this is Gs·Vs over
    /// the current per logit unit of the neuron's switching curve
    /// (100 µA / 5.7 µA at the default operating point).
    pub neuron_slope: f64,
    pub hidden: usize,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    /// Slope of the sigmoid whose derivative stands in for the step's.
    pub surrogate_slope: f64,
    pub seed: u64,
    /// Training accuracy below this after the last epoch is a failure.
    pub min_train_accuracy: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            surrogate: Surrogate::MeanField,
            neuron_slope: 17.5,
            hidden: 25,
            epochs: 100,
            batch: 32,
            learning_rate: 0.01,
            surrogate_slope: 4.0,
            seed: 1,
            min_train_accuracy: 0.9,
        }
    }
}

/// Adam state for one parameter vector.
struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    fn update(&mut self, w: &mut [f64], g: &[f64], lr: f64, t: i32) {
        let (b1, b2) = (0.9f64, 0.999f64);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for k in 0..w.len() {
            self.m[k] = b1 * self.m[k] + (1.0 - b1) * g[k];
            self.v[k] = b2 * self.v[k] + (1.0 - b2) * g[k] * g[k];
            w[k] -= lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + 1e-8);
        }
    }
}

/// Minibatch Adam on softmax cross-entropy, with the binary hidden neurons
/// replaced by `p.surrogate` for the gradient.
pub fn train_offline(ds: &Dataset, p: &TrainParams) -> Result<FloatNetwork> {
    if ds.is_empty() || p.batch == 0 || p.hidden == 0 {
        return Err(Error::Training("empty dataset, batch or hidden layer".into()));
    }
    let mut net = FloatNetwork::random(p.hidden, p.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ 0x5eed);
    let (h, n_in) = (p.hidden, PIXELS);
    let mut opt = [
        Adam::new(h * n_in),
        Adam::new(h),
        Adam::new(CLASSES * h),
        Adam::new(CLASSES),
    ];
    let mut order: Vec<usize> = (0..ds.len()).collect();
    let mut t = 0;
    // keep the epoch whose hard-threshold network scores best on the training set
    let mut best = (net.accuracy(ds), net.clone());
    for _ in 0..p.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(p.batch) {
            let mut g = [
                vec![0.0; h * n_in],
                vec![0.0; h],
                vec![0.0; CLASSES * h],
                vec![0.0; CLASSES],
            ];
            for &k in batch {
                let x = pixels(&ds.images[k]);
                let label = ds.labels[k] as usize;
                match p.surrogate {
                    Surrogate::StraightThrough => straight_through_grad(&net, &x, label, p.surrogate_slope, &mut g),
                    Surrogate::MeanField => mean_field_grad(&net, &x, label, p.neuron_slope, &mut g),
                }
            }
            let scale = 1.0 / batch.len() as f64;
            g.iter_mut().flatten().for_each(|v| *v *= scale);
            t += 1;
            opt[0].update(&mut net.hidden.weights, &g[0], p.learning_rate, t);
            opt[1].update(&mut net.hidden.bias, &g[1], p.learning_rate, t);
            opt[2].update(&mut net.output.weights, &g[2], p.learning_rate, t);
            opt[3].update(&mut net.output.bias, &g[3], p.learning_rate, t);
        }
        let acc = net.accuracy(ds);
        if acc > best.0 {
            best = (acc, net.clone());
        }
    }
    let (acc, net) = best;
    if acc < p.min_train_accuracy {
        return Err(Error::Training(format!(
            "training accuracy {acc:.3} below {:.3} after {} epochs",
            p.min_train_accuracy, p.epochs
        )));
    }
    Ok(net)
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Softmax cross-entropy gradient with respect to the logits.
fn softmax_delta(logits: &[f64], label: usize) -> Vec<f64> {
    let zmax = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|z| (z - zmax).exp()).collect();
    let sum: f64 = e.iter().sum();
    (0..e.len()).map(|c| e[c] / sum - (c == label) as u8 as f64).collect()
}

type Grads = [Vec<f64>; 4];

fn straight_through_grad(net: &FloatNetwork, x: &[f64], label: usize, slope: f64, g: &mut Grads) {
    let (h, n_in) = (net.hidden.outputs, net.hidden.inputs);
    let z1 = net.hidden.preactivation(x);
    let a1: Vec<f64> = z1.iter().map(|&z| step(z)).collect();
    let d2 = softmax_delta(&net.output.preactivation(&a1), label);
    for c in 0..CLASSES {
        g[3][c] += d2[c];
        for j in 0..h {
            g[2][c * h + j] += d2[c] * a1[j];
        }
    }
    for j in 0..h {
        let back: f64 = (0..CLASSES).map(|c| d2[c] * net.output.weights[c * h + j]).sum();
        let s = sigmoid(slope * z1[j]);
        let d1 = back * slope * s * (1.0 - s);
        g[1][j] += d1;
        for i in 0..n_in {
            g[0][j * n_in + i] += d1 * x[i];
        }
    }
}

/// Derivative of |x|, taking 0 at 0.
fn sign(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum()
    }
}

/// Σ|w| over one output's weights and bias.
fn column_norm(layer: &DenseLayer, o: usize) -> f64 {
    let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
    row.iter().map(|w| w.abs()).sum::<f64>() + layer.bias[o].abs()
}

/// Gradients of one layer of u = z / Σ|w| given dL/du; returns dL/dx.
fn normalized_backward(layer: &DenseLayer, x: &[f64], z: &[f64], du: &[f64], gw: &mut [f64], gb: &mut [f64]) -> Vec<f64> {
    let n = layer.inputs;
    let mut dx = vec![0.0; n];
    for o in 0..layer.outputs {
        let d = column_norm(layer, o).max(1e-12);
        let dz = du[o] / d;
        let dd = -du[o] * z[o] / (d * d);
        for i in 0..n {
            let w = layer.weights[o * n + i];
            gw[o * n + i] += dz * x[i] + dd * sign(w);
            dx[i] += dz * w;
        }
        gb[o] += dz + dd * sign(layer.bias[o]);
    }
    dx
}

fn mean_field_grad(net: &FloatNetwork, x: &[f64], label: usize, slope: f64, g: &mut Grads) {
    let z1 = net.hidden.preactivation(x);
    let a1: Vec<f64> = (0..z1.len())
        .map(|j| sigmoid(slope * z1[j] / column_norm(&net.hidden, j).max(1e-12)))
        .collect();
    let z2 = net.output.preactivation(&a1);
    let logits: Vec<f64> = (0..CLASSES)
        .map(|c| slope * z2[c] / column_norm(&net.output, c).max(1e-12))
        .collect();
    let du2: Vec<f64> = softmax_delta(&logits, label).iter().map(|d| d * slope).collect();
    let [g0, g1, g2, g3] = g;
    let da1 = normalized_backward(&net.output, &a1, &z2, &du2, g2, g3);
    let du1: Vec<f64> = (0..a1.len()).map(|j| da1[j] * slope * a1[j] * (1.0 - a1[j])).collect();
    normalized_backward(&net.hidden, x, &z1, &du1, g0, g1);
}
