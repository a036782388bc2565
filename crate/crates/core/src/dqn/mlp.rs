//! Fully connected ReLU network with a linear output layer and hand-written
//! backpropagation for the DQN regression loss.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;

use crate::error::DqnError;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `fan_in x fan_out`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Dense { weights: Array2::zeros((fan_in, fan_out)), bias: Array1::zeros(fan_out) }
    }

    /// Uniform in `+-sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn glorot<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weights = Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-limit..limit));
        Dense { weights, bias: Array1::zeros(fan_out) }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.ncols()
    }
}

/// Q-network parameters. Also used as the container for gradients and
/// optimizer moments, which share its shape.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub layers: Vec<Dense>,
}

pub type Gradient = QNetwork;

fn relu_inplace(x: &mut Array2<f64>) {
    x.mapv_inplace(|v| v.max(0.0));
}

impl QNetwork {
    /// `sizes = [input, hidden..., output]`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        QNetwork { layers: sizes.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect() }
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        QNetwork { layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect() }
    }

    pub fn zeros_like(other: &QNetwork) -> Self {
        QNetwork { layers: other.layers.iter().map(|l| Dense::zeros(l.fan_in(), l.fan_out())).collect() }
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.input_dim()];
        sizes.extend(self.layers.iter().map(Dense::fan_out));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").fan_out()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().all(|v| v.is_finite()) && l.bias.iter().all(|v| v.is_finite()))
    }

    /// Row-per-sample forward pass; returns `batch x output_dim`.
    pub fn forward_batch(&self, inputs: ArrayView2<f64>) -> Array2<f64> {
        let mut x = inputs.to_owned();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            x = x.dot(&layer.weights) + &layer.bias;
            if k < last {
                relu_inplace(&mut x);
            }
        }
        x
    }

    /// Action values for one observation.
    pub fn forward(&self, obs: &[f64]) -> Result<Vec<f64>, DqnError> {
        if obs.len() != self.input_dim() {
            return Err(DqnError::InputShape { expected: self.input_dim(), got: obs.len() });
        }
        if !obs.iter().all(|v| v.is_finite()) {
            return Err(DqnError::NonFiniteInput);
        }
        Ok(self.forward_one(obs))
    }

    /// Single-sample pass as vector-matrix products over contiguous rows.
    fn forward_one(&self, obs: &[f64]) -> Vec<f64> {
        let mut x = obs.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut out = layer.bias.to_vec();
            for (xi, row) in x.iter().zip(layer.weights.rows()) {
                if *xi == 0.0 {
                    continue;
                }
                let row = row.as_slice().expect("row-major weights");
                for (o, w) in out.iter_mut().zip(row) {
                    *o += xi * w;
                }
            }
            if k < last {
                out.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            x = out;
        }
        x
    }

    /// Mean squared TD error over the batch, `mean_b (y_b - Q(s_b, a_b))^2`,
    /// and its gradient. Only the taken action's output receives gradient;
    /// ReLU uses subgradient 0 at the kink.
    pub fn loss_and_grad(&self, states: ArrayView2<f64>, actions: &[usize], targets: &[f64]) -> (f64, Gradient) {
        let batch = states.nrows();
        assert_eq!(actions.len(), batch, "one action per state");
        assert_eq!(targets.len(), batch, "one target per state");
        let last = self.layers.len() - 1;

        // Hidden activations; `acts[k]` is the input to layer k.
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        acts.push(states.to_owned());
        for layer in &self.layers[..last] {
            let mut z = acts.last().expect("input").dot(&layer.weights) + &layer.bias;
            relu_inplace(&mut z);
            acts.push(z);
        }

        // The output layer is only needed at the taken actions.
        let out = &self.layers[last];
        let h = &acts[last];
        let mut residual = vec![0.0; batch];
        let mut loss = 0.0;
        for b in 0..batch {
            let a = actions[b];
            let q = h.row(b).dot(&out.weights.column(a)) + out.bias[a];
            let r = targets[b] - q;
            loss += r * r;
            residual[b] = r;
        }
        loss /= batch as f64;

        let mut grad = QNetwork::zeros_like(self);
        // dL/dQ(s_b, a_b) = -2 r_b / B
        let scale = -2.0 / batch as f64;
        let mut delta = Array2::<f64>::zeros((batch, h.ncols()));
        {
            let g_out = &mut grad.layers[last];
            for b in 0..batch {
                let a = actions[b];
                let d = scale * residual[b];
                g_out.weights.column_mut(a).scaled_add(d, &h.row(b));
                g_out.bias[a] += d;
                delta.row_mut(b).scaled_add(d, &out.weights.column(a));
            }
        }

        for k in (0..last).rev() {
            // Through the ReLU that produced acts[k + 1].
            Zip::from(&mut delta).and(&acts[k + 1]).for_each(|d, &act| {
                if act <= 0.0 {
                    *d = 0.0;
                }
            });
            let g = &mut grad.layers[k];
            g.weights = acts[k].t().dot(&delta);
            g.bias = delta.sum_axis(Axis(0));
            if k > 0 {
                delta = delta.dot(&self.layers[k].weights.t());
            }
        }
        (loss, grad)
    }

    /// Copies all parameters from `other` (same shape).
    pub fn copy_from(&mut self, other: &QNetwork) {
        for (dst, src) in self.layers.iter_mut().zip(&other.layers) {
            dst.weights.assign(&src.weights);
            dst.bias.assign(&src.bias);
        }
    }

    /// Flat view over every parameter, weights before bias, layer by layer.
    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Stacks observations into a `batch x dim` matrix.
pub fn stack_rows<'a, I>(rows: I, dim: usize) -> Array2<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let flat: Vec<f64> = rows.into_iter().flat_map(|r| r.iter().copied()).collect();
    let n = flat.len() / dim;
    Array2::from_shape_vec((n, dim), flat).expect("rows of equal width")
}
