use ndarray::Zip;

use super::mlp::{Gradient, QNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// First and second moment estimates, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first: QNetwork,
    pub second: QNetwork,
    pub step: u64,
}

impl AdamState {
    pub fn new(net: &QNetwork) -> Self {
        AdamState { first: QNetwork::zeros_like(net), second: QNetwork::zeros_like(net), step: 0 }
    }
}

/// One bias-corrected Adam update of `net` in place.
pub fn adam_step(net: &mut QNetwork, grad: &Gradient, state: &mut AdamState, lr: f64, cfg: &AdamConfig) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    let (b1, b2, eps) = (cfg.beta1, cfg.beta2, cfg.epsilon);
    let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: &f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };
    for (k, layer) in net.layers.iter_mut().enumerate() {
        let (m, v, g) = (&mut state.first.layers[k], &mut state.second.layers[k], &grad.layers[k]);
        Zip::from(&mut layer.weights)
            .and(&mut m.weights)
            .and(&mut v.weights)
            .and(&g.weights)
            .for_each(update);
        Zip::from(&mut layer.bias).and(&mut m.bias).and(&mut v.bias).and(&g.bias).for_each(update);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net() -> QNetwork {
        QNetwork::new(&[3, 5, 2], &mut ChaCha8Rng::seed_from_u64(8))
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut n = net();
        let before = n.clone();
        let mut st = AdamState::new(&n);
        let zero = QNetwork::zeros_like(&n);
        for _ in 0..100 {
            adam_step(&mut n, &zero, &mut st, 1e-3, &AdamConfig::default());
        }
        assert_eq!(n, before);
        assert_eq!(st.step, 100);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut n = net();
        let before = n.clone();
        let mut st = AdamState::new(&n);
        let mut g = QNetwork::zeros_like(&n);
        for (k, p) in g.params_mut().enumerate() {
            *p = if k % 2 == 0 { 0.37 } else { -2.5 };
        }
        let lr = 1e-3;
        adam_step(&mut n, &g, &mut st, lr, &AdamConfig::default());
        // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
        for ((after, b), gk) in n.params().zip(before.params()).zip(g.params()) {
            let expected = -lr * gk / (gk.abs() + 1e-8);
            assert!((after - b - expected).abs() < 1e-15);
            assert!(((after - b).abs() - lr).abs() < 1e-10);
        }
    }

    #[test]
    fn trajectories_are_reproducible() {
        let run = || {
            let mut n = net();
            let mut st = AdamState::new(&n);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            use rand::Rng;
            for _ in 0..20 {
                let mut g = QNetwork::zeros_like(&n);
                g.params_mut().for_each(|p| *p = rng.random_range(-1.0..1.0));
                adam_step(&mut n, &g, &mut st, 1e-2, &AdamConfig::default());
            }
            n
        };
        let (a, b) = (run(), run());
        assert!(a.params().zip(b.params()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
