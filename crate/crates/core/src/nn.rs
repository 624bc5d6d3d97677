//! A small fully-connected binary classifier with manual backpropagation.
//!
//! Both learned components (the point-wise grounding head and the grasp
//! scorer) are tiny MLPs — a handful of dense layers with ReLU in between
//! and a sigmoid read-out — trained with Adam on binary cross-entropy.
//! Everything is f64 and deterministically seeded: identical data, config,
//! and seed reproduce bit-identical parameters, so trained models can be
//! checked into manifests and regenerated byte-for-byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One dense layer, y = W·x + b, with W stored row-major (rows × cols).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Dense {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    fn glorot(rows: usize, cols: usize, rng: &mut ChaCha12Rng) -> Self {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let w = (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect();
        Dense { rows, cols, w, b: vec![0.0; rows] }
    }

    fn apply(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.w[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.b[r];
            for (wi, xi) in row.iter().zip(x.iter()) {
                acc += wi * xi;
            }
            out.push(acc);
        }
    }
}

/// Multi-layer perceptron with ReLU between layers and a single linear
/// output unit; the sigmoid lives in the loss / probability read-out.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

/// Numerically stable σ(z).
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable binary cross-entropy from the logit:
/// max(z,0) − z·y + ln(1 + e^(−|z|)).
pub fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

impl Mlp {
    /// Glorot-initialized network with the given layer widths; the last
    /// width must be 1 (binary head).
    pub fn new(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::ShapeMismatch("need at least input and output widths".into()));
        }
        if *widths.last().unwrap() != 1 {
            return Err(Error::ShapeMismatch("binary head requires final width 1".into()));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let layers = widths
            .windows(2)
            .map(|w| Dense::glorot(w[1], w[0], &mut rng))
            .collect();
        Ok(Mlp { layers })
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].cols
    }

    /// Raw output logit for one feature vector.
    pub fn logit(&self, x: &[f64]) -> f64 {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (li, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if li != last {
                for v in next.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur[0]
    }

    /// σ(logit): the predicted probability of the positive class.
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    /// Flat parameter accessors, used by the finite-difference gradient
    /// check and by Adam. Order: layer 0 weights, layer 0 biases, layer 1
    /// weights, ...
    pub fn get_param(&self, mut i: usize) -> f64 {
        for l in &self.layers {
            if i < l.w.len() {
                return l.w[i];
            }
            i -= l.w.len();
            if i < l.b.len() {
                return l.b[i];
            }
            i -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    pub fn set_param(&mut self, mut i: usize, v: f64) {
        for l in &mut self.layers {
            if i < l.w.len() {
                l.w[i] = v;
                return;
            }
            i -= l.w.len();
            if i < l.b.len() {
                l.b[i] = v;
                return;
            }
            i -= l.b.len();
        }
        panic!("parameter index out of range");
    }

    /// Mean BCE loss and its gradient (flat layout) over a batch.
    pub fn loss_and_grad(&self, batch: &[(&[f64], f64)]) -> (f64, Vec<f64>) {
        assert!(!batch.is_empty(), "empty batch");
        let mut grad = vec![0.0; self.num_params()];
        let mut loss = 0.0;
        let last = self.layers.len() - 1;

        // Per-sample forward pass keeping every layer input, then a backward
        // sweep accumulating into the flat gradient.
        let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len() + 1);
        for &(x, y) in batch {
            inputs.clear();
            inputs.push(x.to_vec());
            let mut next = Vec::new();
            for (li, layer) in self.layers.iter().enumerate() {
                layer.apply(inputs.last().unwrap(), &mut next);
                if li != last {
                    for v in next.iter_mut() {
                        if *v < 0.0 {
                            *v = 0.0;
                        }
                    }
                }
                inputs.push(std::mem::take(&mut next));
            }
            let z = inputs.last().unwrap()[0];
            loss += bce_from_logit(z, y);

            // dL/dz for sigmoid + BCE.
            let mut delta = vec![sigmoid(z) - y];
            let mut offset_end = grad.len();
            for li in (0..self.layers.len()).rev() {
                let layer = &self.layers[li];
                let a_in = &inputs[li];
                let offset = offset_end - layer.w.len() - layer.b.len();
                for r in 0..layer.rows {
                    let d = delta[r];
                    let wrow = offset + r * layer.cols;
                    for c in 0..layer.cols {
                        grad[wrow + c] += d * a_in[c];
                    }
                    grad[offset + layer.w.len() + r] += d;
                }
                if li > 0 {
                    // Propagate through W and the ReLU of the layer below
                    // (whose post-activation is inputs[li]).
                    let mut prev = vec![0.0; layer.cols];
                    for r in 0..layer.rows {
                        let d = delta[r];
                        let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
                        for (pc, wv) in prev.iter_mut().zip(row.iter()) {
                            *pc += d * wv;
                        }
                    }
                    for (p, a) in prev.iter_mut().zip(inputs[li].iter()) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
                offset_end = offset;
            }
        }

        let inv = 1.0 / batch.len() as f64;
        loss *= inv;
        for g in grad.iter_mut() {
            *g *= inv;
        }
        (loss, grad)
    }
}

/// Training schedule for [`train_binary`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

/// Per-epoch mean training loss, returned for monitoring and tests.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainReport {
    pub epoch_loss: Vec<f64>,
}

/// Trains the network in place with Adam on binary cross-entropy.
/// Deterministic: the shuffle stream is seeded once from the config.
pub fn train_binary(
    mlp: &mut Mlp,
    features: &[Vec<f64>],
    targets: &[f64],
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if features.len() != targets.len() {
        return Err(Error::LengthMismatch { lhs: features.len(), rhs: targets.len() });
    }
    if features.is_empty() {
        return Err(Error::EmptyResults);
    }
    let width = mlp.input_width();
    for f in features {
        if f.len() != width {
            return Err(Error::ShapeMismatch(format!(
                "feature width {} does not match network input {width}",
                f.len()
            )));
        }
    }
    if cfg.batch_size == 0 || cfg.epochs == 0 || !(cfg.learning_rate > 0.0) {
        return Err(Error::InvalidConfig("epochs, batch_size, learning_rate must be positive".into()));
    }

    let n_params = mlp.num_params();
    let mut m = vec![0.0; n_params];
    let mut v = vec![0.0; n_params];
    let mut t = 0u32;
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut report = TrainReport { epoch_loss: Vec::with_capacity(cfg.epochs) };

    for _ in 0..cfg.epochs {
        // Fisher–Yates with the session RNG keeps epochs distinct but the
        // whole run reproducible.
        for i in (1..order.len()).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], f64)> =
                chunk.iter().map(|&i| (features[i].as_slice(), targets[i])).collect();
            let (loss, grad) = mlp.loss_and_grad(&batch);
            epoch_loss += loss;
            batches += 1;

            t += 1;
            let bc1 = 1.0 - BETA1.powi(t as i32);
            let bc2 = 1.0 - BETA2.powi(t as i32);
            for (i, g) in grad.iter().enumerate() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
                let step = cfg.learning_rate * (m[i] / bc1) / ((v[i] / bc2).sqrt() + EPS);
                let cur = mlp.get_param(i);
                mlp.set_param(i, cur - step);
            }
        }
        report.epoch_loss.push(epoch_loss / batches as f64);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        // Noisy ring problem: positive inside radius 1, negative outside.
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let x: f64 = rng.gen_range(-2.0..2.0);
            let y: f64 = rng.gen_range(-2.0..2.0);
            xs.push(vec![x, y]);
            ys.push(if x * x + y * y < 1.0 { 1.0 } else { 0.0 });
        }
        (xs, ys)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mlp = Mlp::new(&[5, 8, 4, 1], 3).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let xs: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let batch: Vec<(&[f64], f64)> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| (x.as_slice(), (i % 2) as f64))
            .collect();

        let (_, grad) = mlp.loss_and_grad(&batch);
        let h = 1e-6;
        let n = mlp.num_params();
        for probe in 0..100 {
            // Spread probes across the whole parameter vector.
            let i = (probe * 7919) % n;
            let orig = mlp.get_param(i);
            let mut plus = mlp.clone();
            plus.set_param(i, orig + h);
            let mut minus = mlp.clone();
            minus.set_param(i, orig - h);
            let (lp, _) = plus.loss_and_grad(&batch);
            let (lm, _) = minus.loss_and_grad(&batch);
            let numeric = (lp - lm) / (2.0 * h);
            let denom = numeric.abs().max(grad[i].abs()).max(1e-8);
            assert!(
                (numeric - grad[i]).abs() / denom < 1e-4,
                "param {i}: analytic {} vs numeric {numeric}",
                grad[i]
            );
        }
    }

    #[test]
    fn learns_a_separable_ring() {
        let (xs, ys) = toy_data(600, 4);
        let mut mlp = Mlp::new(&[2, 16, 8, 1], 7).unwrap();
        let cfg = TrainConfig { epochs: 80, batch_size: 32, learning_rate: 5e-3, seed: 11 };
        let report = train_binary(&mut mlp, &xs, &ys, &cfg).unwrap();
        assert!(
            report.epoch_loss.last().unwrap() < &(report.epoch_loss[0] * 0.5),
            "training halves the loss: {:?}",
            (report.epoch_loss.first(), report.epoch_loss.last())
        );

        let (xt, yt) = toy_data(400, 99);
        let correct = xt
            .iter()
            .zip(yt.iter())
            .filter(|(x, &y)| (mlp.predict(x) > 0.5) == (y > 0.5))
            .count();
        let acc = correct as f64 / yt.len() as f64;
        assert!(acc > 0.9, "held-out accuracy {acc}");
    }

    #[test]
    fn training_is_bit_identical() {
        let (xs, ys) = toy_data(200, 1);
        let cfg = TrainConfig { epochs: 10, batch_size: 16, learning_rate: 1e-3, seed: 5 };
        let mut a = Mlp::new(&[2, 8, 1], 2).unwrap();
        let mut b = Mlp::new(&[2, 8, 1], 2).unwrap();
        train_binary(&mut a, &xs, &ys, &cfg).unwrap();
        train_binary(&mut b, &xs, &ys, &cfg).unwrap();
        for i in 0..a.num_params() {
            assert_eq!(a.get_param(i).to_bits(), b.get_param(i).to_bits());
        }
        // And through JSON, models round-trip exactly on re-serialization.
        let ja = serde_json::to_string(&a).unwrap();
        let back: Mlp = serde_json::from_str(&ja).unwrap();
        assert_eq!(ja, serde_json::to_string(&back).unwrap());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Mlp::new(&[4], 0).is_err());
        assert!(Mlp::new(&[4, 3], 0).is_err());
        let mut ok = Mlp::new(&[4, 3, 1], 0).unwrap();
        let bad = vec![vec![0.0; 5]];
        assert!(train_binary(
            &mut ok,
            &bad,
            &[1.0],
            &TrainConfig { epochs: 1, batch_size: 1, learning_rate: 1e-3, seed: 0 }
        )
        .is_err());
    }

    #[test]
    fn stable_sigmoid_and_bce() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!(sigmoid(800.0) <= 1.0 && sigmoid(800.0) > 0.999);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0) < 1e-3);
        assert!(bce_from_logit(800.0, 1.0) < 1e-12);
        assert!(bce_from_logit(-800.0, 0.0) < 1e-12);
        assert!(bce_from_logit(-800.0, 1.0) > 100.0);
        // Matches the naive formula in the stable regime.
        let (z, y) = (1.3, 1.0);
        let naive = -(y * sigmoid(z).ln() + (1.0 - y) * (1.0 - sigmoid(z)).ln());
        assert!((bce_from_logit(z, y) - naive).abs() < 1e-12);
    }
}
