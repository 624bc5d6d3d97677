//! A small two-hidden-layer perceptron with a sigmoid head, written out by
//! hand so training is dependency-free, bit-deterministic, and cheap to
//! gradient-check. Parameters live in one flat vector (weights then biases,
//! layer by layer) so the optimizer and finite-difference probes address
//! them uniformly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// First hidden width.
pub const HIDDEN1: usize = 64;
/// Second hidden width.
pub const HIDDEN2: usize = 32;

/// Binary per-point classifier: input → 64 → 32 → 1, rectified hidden units,
/// sigmoid output trained with binary cross-entropy.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    pub input_dim: usize,
    /// Flat parameters: `[w1 | b1 | w2 | b2 | w3 | b3]`, matrices row-major.
    pub params: Vec<f64>,
}

impl Mlp {
    /// He-style uniform initialization, deterministic in the seed.
    pub fn new(input_dim: usize, seed: u64) -> Mlp {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut params = vec![0.0f64; Self::param_count(input_dim)];
        let (o_w1, o_b1, o_w2, _o_b2, o_w3, _o_b3) = Self::offsets(input_dim);
        let bounds = [
            (o_w1, o_b1, (6.0 / (input_dim + HIDDEN1) as f64).sqrt()),
            (o_w2, o_w2 + HIDDEN2 * HIDDEN1, (6.0 / (HIDDEN1 + HIDDEN2) as f64).sqrt()),
            (o_w3, o_w3 + HIDDEN2, (6.0 / (HIDDEN2 + 1) as f64).sqrt()),
        ];
        for (start, end, s) in bounds {
            for p in &mut params[start..end] {
                *p = rng.gen_range(-s..s);
            }
        }
        Mlp { input_dim, params }
    }

    pub fn param_count(input_dim: usize) -> usize {
        HIDDEN1 * input_dim + HIDDEN1 + HIDDEN2 * HIDDEN1 + HIDDEN2 + HIDDEN2 + 1
    }

    /// Section starts: (w1, b1, w2, b2, w3, b3).
    fn offsets(input_dim: usize) -> (usize, usize, usize, usize, usize, usize) {
        let w1 = 0;
        let b1 = w1 + HIDDEN1 * input_dim;
        let w2 = b1 + HIDDEN1;
        let b2 = w2 + HIDDEN2 * HIDDEN1;
        let w3 = b2 + HIDDEN2;
        let b3 = w3 + HIDDEN2;
        (w1, b1, w2, b2, w3, b3)
    }

    /// Pre-sigmoid output for one input row.
    pub fn logit(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.input_dim);
        let (o_w1, o_b1, o_w2, o_b2, o_w3, o_b3) = Self::offsets(self.input_dim);
        let p = &self.params;
        let mut a1 = [0.0f64; HIDDEN1];
        for (i, a) in a1.iter_mut().enumerate() {
            let row = &p[o_w1 + i * self.input_dim..o_w1 + (i + 1) * self.input_dim];
            let mut acc = p[o_b1 + i];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            *a = acc.max(0.0);
        }
        let mut a2 = [0.0f64; HIDDEN2];
        for (i, a) in a2.iter_mut().enumerate() {
            let row = &p[o_w2 + i * HIDDEN1..o_w2 + (i + 1) * HIDDEN1];
            let mut acc = p[o_b2 + i];
            for (w, v) in row.iter().zip(&a1) {
                acc += w * v;
            }
            *a = acc.max(0.0);
        }
        let mut out = p[o_b3];
        for (w, v) in p[o_w3..o_w3 + HIDDEN2].iter().zip(&a2) {
            out += w * v;
        }
        out
    }

    /// Classifier probability for one input row.
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }

    /// Adds this sample's loss gradient into `grad` (aligned with `params`)
    /// and returns its binary cross-entropy loss.
    pub fn accumulate_gradient(&self, x: &[f64], y: f64, grad: &mut [f64]) -> f64 {
        debug_assert_eq!(grad.len(), self.params.len());
        let (o_w1, o_b1, o_w2, o_b2, o_w3, o_b3) = Self::offsets(self.input_dim);
        let p = &self.params;

        let mut z1 = [0.0f64; HIDDEN1];
        let mut a1 = [0.0f64; HIDDEN1];
        for i in 0..HIDDEN1 {
            let row = &p[o_w1 + i * self.input_dim..o_w1 + (i + 1) * self.input_dim];
            let mut acc = p[o_b1 + i];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            z1[i] = acc;
            a1[i] = acc.max(0.0);
        }
        let mut z2 = [0.0f64; HIDDEN2];
        let mut a2 = [0.0f64; HIDDEN2];
        for i in 0..HIDDEN2 {
            let row = &p[o_w2 + i * HIDDEN1..o_w2 + (i + 1) * HIDDEN1];
            let mut acc = p[o_b2 + i];
            for (w, v) in row.iter().zip(&a1) {
                acc += w * v;
            }
            z2[i] = acc;
            a2[i] = acc.max(0.0);
        }
        let mut z3 = p[o_b3];
        for (w, v) in p[o_w3..o_w3 + HIDDEN2].iter().zip(&a2) {
            z3 += w * v;
        }
        let loss = bce_with_logit(z3, y);

        let d3 = sigmoid(z3) - y;
        for i in 0..HIDDEN2 {
            grad[o_w3 + i] += d3 * a2[i];
        }
        grad[o_b3] += d3;

        let mut d2 = [0.0f64; HIDDEN2];
        for i in 0..HIDDEN2 {
            if z2[i] > 0.0 {
                d2[i] = d3 * p[o_w3 + i];
            }
        }
        let mut d1 = [0.0f64; HIDDEN1];
        for i in 0..HIDDEN2 {
            if d2[i] == 0.0 {
                continue;
            }
            let row_start = o_w2 + i * HIDDEN1;
            for j in 0..HIDDEN1 {
                grad[row_start + j] += d2[i] * a1[j];
                d1[j] += d2[i] * p[row_start + j];
            }
            grad[o_b2 + i] += d2[i];
        }
        for (j, d) in d1.iter_mut().enumerate() {
            if z1[j] <= 0.0 {
                *d = 0.0;
            }
        }
        for j in 0..HIDDEN1 {
            if d1[j] == 0.0 {
                continue;
            }
            let row_start = o_w1 + j * self.input_dim;
            for (k, v) in x.iter().enumerate() {
                grad[row_start + k] += d1[j] * v;
            }
            grad[o_b1 + j] += d1[j];
        }
        loss
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable binary cross-entropy from the logit.
pub fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (1.0 + (-z.abs()).exp()).ln()
}

/// Adaptive-moment gradient descent state over a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(param_count: usize, learning_rate: f64) -> Adam {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        debug_assert_eq!(params.len(), grad.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    /// Analytic gradients must match central finite differences within 1e-4
    /// relative error on 100 random (input, weight) probes.
    #[test]
    fn gradients_match_finite_differences() {
        let input_dim = 9 + 64;
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for probe in 0..100 {
            let mut mlp = Mlp::new(input_dim, rng.gen());
            let x: Vec<f64> = (0..input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = if rng.gen::<bool>() { 1.0 } else { 0.0 };
            let mut grad = vec![0.0; mlp.params.len()];
            mlp.accumulate_gradient(&x, y, &mut grad);

            let idx = rng.gen_range(0..mlp.params.len());
            let h = 1e-5 * mlp.params[idx].abs().max(1.0);
            let orig = mlp.params[idx];
            mlp.params[idx] = orig + h;
            let up = {
                let z = mlp.logit(&x);
                bce_with_logit(z, y)
            };
            mlp.params[idx] = orig - h;
            let down = {
                let z = mlp.logit(&x);
                bce_with_logit(z, y)
            };
            mlp.params[idx] = orig;
            let numeric = (up - down) / (2.0 * h);
            let analytic = grad[idx];
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            assert!(
                (analytic - numeric).abs() / denom < 1e-4,
                "probe {probe}: analytic {analytic} vs numeric {numeric}"
            );
        }
    }

    #[test]
    fn initialization_is_deterministic() {
        let a = Mlp::new(73, 9);
        let b = Mlp::new(73, 9);
        assert_eq!(a.params, b.params);
        let c = Mlp::new(73, 10);
        assert_ne!(a.params, c.params);
        assert_eq!(a.params.len(), Mlp::param_count(73));
    }

    #[test]
    fn adam_reduces_a_simple_loss() {
        // Fit p(y=1|x) on a linearly separable toy problem.
        let mut mlp = Mlp::new(2, 3);
        let mut adam = Adam::new(mlp.params.len(), 1e-2);
        let data: Vec<([f64; 2], f64)> = (0..64)
            .map(|i| {
                let v = (i as f64 / 32.0) - 1.0;
                ([v, -v], if v > 0.0 { 1.0 } else { 0.0 })
            })
            .collect();
        let mut first = None;
        let mut last = 0.0;
        for _ in 0..300 {
            let mut grad = vec![0.0; mlp.params.len()];
            let mut loss = 0.0;
            for (x, y) in &data {
                loss += mlp.accumulate_gradient(x, *y, &mut grad);
            }
            loss /= data.len() as f64;
            for g in &mut grad {
                *g /= data.len() as f64;
            }
            adam.step(&mut mlp.params, &grad);
            first.get_or_insert(loss);
            last = loss;
        }
        assert!(last < 0.05, "final loss {last}");
        assert!(last < first.unwrap());
    }

    #[test]
    fn sigmoid_and_bce_are_stable_at_extremes() {
        assert!(sigmoid(800.0) <= 1.0 && sigmoid(800.0) > 0.999);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0) < 1e-3);
        assert!(bce_with_logit(800.0, 1.0) >= 0.0);
        assert!(bce_with_logit(-800.0, 0.0) >= 0.0);
        assert!(bce_with_logit(800.0, 0.0).is_finite());
    }
}
