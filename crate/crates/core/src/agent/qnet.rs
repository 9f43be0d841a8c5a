//! Dense Q-network with rectifier hidden layers and a linear output.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub layer_dims: Vec<usize>,
    /// Layer `l` maps `layer_dims[l]` to `layer_dims[l + 1]`; weights are
    /// stored output-major (`out x in`).
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Gradients laid out like the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl QNetwork {
    /// He-uniform weights, zero biases.
    pub fn new(layer_dims: &[usize], rng: &mut SimRng) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::Domain("a network needs at least two non-empty layers".into()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_dims.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / fan_in as f64).sqrt();
            weights.push(Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-bound..bound)));
            biases.push(Array1::zeros(fan_out));
        }
        Ok(Self { layer_dims: layer_dims.to_vec(), weights, biases })
    }

    pub fn zeros(layer_dims: &[usize]) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(Error::Domain("a network needs at least two non-empty layers".into()));
        }
        let weights = layer_dims.windows(2).map(|p| Array2::zeros((p[1], p[0]))).collect();
        let biases = layer_dims[1..].iter().map(|&n| Array1::zeros(n)).collect();
        Ok(Self { layer_dims: layer_dims.to_vec(), weights, biases })
    }

    pub fn from_parts(weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Domain("weights and biases disagree on the layer count".into()));
        }
        let mut dims = vec![weights[0].ncols()];
        for (w, b) in weights.iter().zip(&biases) {
            if w.ncols() != *dims.last().unwrap() || b.len() != w.nrows() {
                return Err(Error::Domain("incompatible layer shapes".into()));
            }
            dims.push(w.nrows());
        }
        if weights.iter().flatten().chain(biases.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        Ok(Self { layer_dims: dims, weights, biases })
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Domain(format!("input has {} entries, network expects {}", x.len(), self.input_dim())));
        }
        let input = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(input).into_raw_vec_and_offset().0)
    }

    /// Row-per-sample forward pass.
    pub fn forward_batch(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let last = self.weights.len() - 1;
        let mut a = x.to_owned();
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            a = a.dot(&w.t()) + b;
            if l < last {
                a.mapv_inplace(|v| v.max(0.0));
            }
        }
        a
    }

    /// Mean squared error of the taken actions' Q-values against `targets`
    /// and its gradient. Only the selected output units are evaluated.
    pub fn loss_and_gradients(&self, x: ArrayView2<'_, f64>, actions: &[usize], targets: &[f64]) -> (f64, Gradients) {
        let n = x.nrows();
        let last = self.weights.len() - 1;
        let mut acts: Vec<Array2<f64>> = vec![x.to_owned()];
        for l in 0..last {
            let z = acts[l].dot(&self.weights[l].t()) + &self.biases[l];
            acts.push(z.mapv(|v| v.max(0.0)));
        }
        let w_out = &self.weights[last];
        let b_out = &self.biases[last];
        let h = &acts[last];
        let mut grads = Gradients {
            weights: self.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: self.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        };
        let mut loss = 0.0;
        let mut delta = Array2::<f64>::zeros((n, h.ncols()));
        for i in 0..n {
            let a = actions[i];
            let q = h.row(i).dot(&w_out.row(a)) + b_out[a];
            let err = q - targets[i];
            loss += err * err;
            let g = 2.0 * err / n as f64;
            grads.weights[last].row_mut(a).scaled_add(g, &h.row(i));
            grads.biases[last][a] += g;
            delta.row_mut(i).scaled_add(g, &w_out.row(a));
        }
        for l in (0..last).rev() {
            // rectifier derivative at layer l's output
            delta.zip_mut_with(&acts[l + 1], |d, &a| {
                if a <= 0.0 {
                    *d = 0.0;
                }
            });
            grads.weights[l] = delta.t().dot(&acts[l]);
            grads.biases[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                delta = delta.dot(&self.weights[l]);
            }
        }
        (loss / n as f64, grads)
    }

    pub fn loss(&self, x: ArrayView2<'_, f64>, actions: &[usize], targets: &[f64]) -> f64 {
        let q = self.forward_batch(x);
        actions.iter().zip(targets).enumerate().map(|(i, (&a, &y))| (q[[i, a]] - y).powi(2)).sum::<f64>() / x.nrows() as f64
    }
}

/// Adam optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: i32,
    m: Gradients,
    v: Gradients,
}

impl Adam {
    pub fn new(net: &QNetwork, learning_rate: f64) -> Self {
        let zeros = Gradients {
            weights: net.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            biases: net.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        };
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, step: 0, m: zeros.clone(), v: zeros }
    }

    pub fn apply(&mut self, net: &mut QNetwork, grads: &Gradients) {
        self.step += 1;
        let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.epsilon, self.learning_rate);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for l in 0..net.weights.len() {
            ndarray::Zip::from(&mut net.weights[l])
                .and(&grads.weights[l])
                .and(&mut self.m.weights[l])
                .and(&mut self.v.weights[l])
                .for_each(|p, &g, m, v| update(p, g, m, v));
            ndarray::Zip::from(&mut net.biases[l])
                .and(&grads.biases[l])
                .and(&mut self.m.biases[l])
                .and(&mut self.v.biases[l])
                .for_each(|p, &g, m, v| update(p, g, m, v));
        }
    }
}
