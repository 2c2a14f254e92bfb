//! Aggregation followed by a ReLU network.
//!
//! A [`LinearStack`] with hop order `k` first propagates features with `k`
//! self-loop mean steps and then applies `L` affine layers with ReLU in
//! between. `k = 0` is a plain MLP, `L = 1` is multinomial logistic
//! regression on the aggregated features.

mod eval;
mod train;

pub use eval::{compare, evaluate, evaluate_with, margin_loss, CompareReport, EvalOptions, EvalReport, GapBin, HomophilyBin, HOMOPHILY_EDGES};
pub use train::{train, train_on_features, train_with_trace, TrainTrace};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate_matrix, AggregationMode};
use crate::error::{Error, Result};
use crate::graph::GraphBundle;
use crate::matrix::Matrix;
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hops: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub patience: usize,
    pub seed: u64,
    pub mode: AggregationMode,
    /// Step-size halvings allowed within one epoch before training stops.
    pub max_halvings: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hops: 2,
            hidden: vec![16],
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            patience: 50,
            seed: 0,
            mode: AggregationMode::SelfLoop,
            max_halvings: 40,
        }
    }
}

impl TrainConfig {
    pub fn sgc(hops: usize, seed: u64) -> Self {
        TrainConfig {
            hops,
            seed,
            ..Self::default()
        }
    }

    pub fn mlp(seed: u64) -> Self {
        Self::sgc(0, seed)
    }

    /// Single linear layer.
    pub fn logistic(hops: usize, seed: u64) -> Self {
        TrainConfig {
            hidden: Vec::new(),
            ..Self::sgc(hops, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning rate must be positive and finite"));
        }
        if !(self.l2 >= 0.0) || !self.l2.is_finite() {
            return Err(Error::invalid("L2 coefficient must be non-negative"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::invalid("hidden widths must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// `fan_in × fan_out`.
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearStack {
    pub hops: usize,
    pub mode: AggregationMode,
    /// `(d, b_1, …, b_{L−1}, K)`.
    pub widths: Vec<usize>,
    pub layers: Vec<Layer>,
    pub config: TrainConfig,
}

/// Activations of one forward pass: `acts[0]` is the input and `acts[l]`
/// the output of layer `l` (post-ReLU for hidden layers, logits last).
struct Forward {
    acts: Vec<Matrix>,
}

impl LinearStack {
    /// Glorot-uniform weights and zero biases, drawn from the config seed.
    pub fn init(input_dim: usize, num_classes: usize, config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        if input_dim == 0 || num_classes == 0 {
            return Err(Error::invalid("network needs positive input and output widths"));
        }
        let mut widths = vec![input_dim];
        widths.extend(&config.hidden);
        widths.push(num_classes);
        let mut rng = substream(config.seed, "init");
        let layers = widths
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out).map(|_| rng.random_range(-a..=a)).collect();
                Layer {
                    weight: Matrix::from_vec(fan_in, fan_out, data).expect("shape matches"),
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(LinearStack {
            hops: config.hops,
            mode: config.mode,
            widths,
            layers,
            config: config.clone(),
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_classes(&self) -> usize {
        *self.widths.last().expect("at least one width")
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() || self.widths.len() != self.layers.len() + 1 {
            return Err(Error::invalid("layer count does not match widths"));
        }
        for (l, layer) in self.layers.iter().enumerate() {
            if layer.weight.rows() != self.widths[l]
                || layer.weight.cols() != self.widths[l + 1]
                || layer.bias.len() != self.widths[l + 1]
            {
                return Err(Error::invalid(format!("layer {l} shape does not compose")));
            }
            if !layer.weight.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::invalid(format!("layer {l} has non-finite parameters")));
            }
        }
        Ok(())
    }

    /// Input features for this model: `k` aggregation steps of `g`'s features.
    pub fn input_features(&self, g: &GraphBundle) -> Matrix {
        aggregate_matrix(g, g.features(), self.hops, self.mode)
    }

    fn forward(&self, x: &Matrix) -> Forward {
        let mut acts = vec![x.clone()];
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = acts[l].matmul(&layer.weight);
            let last = l + 1 == self.layers.len();
            for i in 0..z.rows() {
                for (v, b) in z.row_mut(i).iter_mut().zip(&layer.bias) {
                    *v += b;
                    if !last && *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(z);
        }
        Forward { acts }
    }

    pub fn logits(&self, x: &Matrix) -> Matrix {
        self.forward(x).acts.pop().expect("non-empty")
    }

    /// Output of the last hidden layer, or the input itself for `L = 1`.
    pub fn hidden_representation(&self, x: &Matrix) -> Matrix {
        let mut acts = self.forward(x).acts;
        acts.swap_remove(acts.len() - 2)
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        let z = self.logits(x);
        z.row_iter().map(argmax).collect()
    }

    /// Σ_l ‖W_l‖_F².
    pub fn weight_norm_sq(&self) -> f64 {
        self.layers.iter().map(|l| l.weight.frobenius_sq()).sum()
    }

    /// Mean softmax cross-entropy over the rows of `x` plus `(λ/2) Σ ‖W_l‖_F²`.
    pub fn loss(&self, x: &Matrix, y: &[usize], l2: f64) -> f64 {
        let z = self.logits(x);
        let ce: f64 = z.row_iter().zip(y).map(|(row, &c)| log_sum_exp(row) - row[c]).sum();
        ce / x.rows() as f64 + 0.5 * l2 * self.weight_norm_sq()
    }

    /// Loss and its gradient with respect to every layer.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[usize], l2: f64) -> (f64, Vec<Layer>) {
        let fw = self.forward(x);
        let n = x.rows() as f64;
        let logits = fw.acts.last().expect("non-empty");
        let mut delta = logits.clone();
        let mut ce = 0.0;
        for (i, &c) in y.iter().enumerate() {
            let row = delta.row_mut(i);
            let lse = log_sum_exp(row);
            ce += lse - row[c];
            for v in row.iter_mut() {
                *v = (*v - lse).exp() / n;
            }
            row[c] -= 1.0 / n;
        }
        let loss = ce / n + 0.5 * l2 * self.weight_norm_sq();

        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &fw.acts[l];
            let mut gw = input.t_matmul(&delta);
            for (g, w) in gw.as_mut_slice().iter_mut().zip(self.layers[l].weight.as_slice()) {
                *g += l2 * w;
            }
            let mut gb = vec![0.0; delta.cols()];
            for row in delta.row_iter() {
                for (g, v) in gb.iter_mut().zip(row) {
                    *g += v;
                }
            }
            grads.push(Layer { weight: gw, bias: gb });
            if l > 0 {
                let mut back = delta.matmul_t(&self.layers[l].weight);
                for (b, a) in back.as_mut_slice().iter_mut().zip(input.as_slice()) {
                    if *a <= 0.0 {
                        *b = 0.0;
                    }
                }
                delta = back;
            }
        }
        grads.reverse();
        (loss, grads)
    }

    /// All parameters, layer by layer, weights (row-major) then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        flatten(&self.layers)
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            for w in layer.weight.as_mut_slice() {
                *w = it.next().expect("parameter count");
            }
            for b in &mut layer.bias {
                *b = it.next().expect("parameter count");
            }
        }
    }

    pub fn flat_gradient(&self, x: &Matrix, y: &[usize], l2: f64) -> (f64, Vec<f64>) {
        let (loss, grads) = self.loss_and_gradient(x, y, l2);
        (loss, flatten(&grads))
    }

    fn step(&self, grads: &[Layer], lr: f64) -> LinearStack {
        let mut next = self.clone();
        for (layer, g) in next.layers.iter_mut().zip(grads) {
            for (w, d) in layer.weight.as_mut_slice().iter_mut().zip(g.weight.as_slice()) {
                *w -= lr * d;
            }
            for (b, d) in layer.bias.iter_mut().zip(&g.bias) {
                *b -= lr * d;
            }
        }
        next
    }
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        out.extend_from_slice(l.weight.as_slice());
        out.extend_from_slice(&l.bias);
    }
    out
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_shapes_and_bounds() {
        let cfg = TrainConfig {
            hidden: vec![4, 3],
            ..TrainConfig::default()
        };
        let m = LinearStack::init(5, 2, &cfg).unwrap();
        assert_eq!(m.widths, vec![5, 4, 3, 2]);
        m.validate().unwrap();
        let a = (6.0f64 / 9.0).sqrt();
        assert!(m.layers[0].weight.as_slice().iter().all(|w| w.abs() <= a));
        assert!(m.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        assert_eq!(m, LinearStack::init(5, 2, &cfg).unwrap());
    }

    #[test]
    fn argmax_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0]), 0);
    }

    #[test]
    fn hidden_representation_of_single_layer_is_input() {
        let m = LinearStack::init(3, 2, &TrainConfig::logistic(0, 1)).unwrap();
        let x = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(m.hidden_representation(&x), x);
    }
}
