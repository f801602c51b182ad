use serde::{Deserialize, Serialize};

use super::SparseVector;
use crate::{Error, Result};

/// Independent sigmoid outputs over a shared linear map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearHead {
    /// One row of length `dim` per output.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadGradient {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy on a logit, computed without overflow.
fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

impl LinearHead {
    pub fn zeros(n_outputs: usize, dim: usize) -> Self {
        LinearHead {
            weights: vec![vec![0.0; dim]; n_outputs],
            bias: vec![0.0; n_outputs],
        }
    }

    pub fn n_outputs(&self) -> usize {
        self.bias.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if self.weights.len() != self.bias.len() || self.weights.iter().any(|r| r.len() != dim) {
            return Err(Error::Validation("head weights and bias have inconsistent shapes".into()));
        }
        if self
            .weights
            .iter()
            .flatten()
            .chain(&self.bias)
            .any(|v| !v.is_finite())
        {
            return Err(Error::Validation("head parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn logits(&self, x: &SparseVector) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| x.dot(w) + b)
            .collect()
    }

    pub fn scores(&self, x: &SparseVector) -> Vec<f64> {
        self.logits(x).into_iter().map(sigmoid).collect()
    }

    /// Mean over instances of the summed per-output cross-entropy.
    pub fn loss(&self, xs: &[&SparseVector], ys: &[&[f64]]) -> f64 {
        if xs.is_empty() {
            return 0.0;
        }
        let total: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                self.logits(x)
                    .iter()
                    .zip(y.iter())
                    .map(|(&z, &t)| bce_with_logit(z, t))
                    .sum::<f64>()
            })
            .sum();
        total / xs.len() as f64
    }

    /// Loss together with its analytic gradient.
    pub fn loss_and_gradient(&self, xs: &[&SparseVector], ys: &[&[f64]]) -> (f64, HeadGradient) {
        let mut grad = HeadGradient {
            weights: vec![vec![0.0; self.dim()]; self.n_outputs()],
            bias: vec![0.0; self.n_outputs()],
        };
        if xs.is_empty() {
            return (0.0, grad);
        }
        let inv_n = 1.0 / xs.len() as f64;
        let mut total = 0.0;
        for (x, y) in xs.iter().zip(ys) {
            for (k, z) in self.logits(x).into_iter().enumerate() {
                total += bce_with_logit(z, y[k]);
                let d = (sigmoid(z) - y[k]) * inv_n;
                grad.bias[k] += d;
                let row = &mut grad.weights[k];
                for (i, v) in x.iter() {
                    row[i] += d * v;
                }
            }
        }
        (total * inv_n, grad)
    }
}

/// Adaptive-moment optimizer state for a `LinearHead`.
pub(crate) struct Adam {
    m: LinearHead,
    v: LinearHead,
    t: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

impl Adam {
    pub(crate) fn new(shape: &LinearHead) -> Self {
        Adam {
            m: LinearHead::zeros(shape.n_outputs(), shape.dim()),
            v: LinearHead::zeros(shape.n_outputs(), shape.dim()),
            t: 0,
        }
    }

    pub(crate) fn step(&mut self, params: &mut LinearHead, grad: &HeadGradient, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = BETA1 * *m + (1.0 - BETA1) * g;
            *v = BETA2 * *v + (1.0 - BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + EPS);
        };
        for k in 0..params.n_outputs() {
            let (pw, gw) = (&mut params.weights[k], &grad.weights[k]);
            let (mw, vw) = (&mut self.m.weights[k], &mut self.v.weights[k]);
            for i in 0..pw.len() {
                update(&mut pw[i], gw[i], &mut mw[i], &mut vw[i]);
            }
            update(
                &mut params.bias[k],
                grad.bias[k],
                &mut self.m.bias[k],
                &mut self.v.bias[k],
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0) >= 0.0);
        assert!(sigmoid(1000.0) <= 1.0);
        assert!(bce_with_logit(1000.0, 0.0).is_finite());
        assert!((bce_with_logit(0.0, 1.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut head = LinearHead::zeros(2, 5);
        head.weights[0] = vec![0.3, -0.2, 0.5, 0.0, 1.1];
        head.weights[1] = vec![-0.7, 0.4, 0.0, 0.9, -0.1];
        head.bias = vec![0.1, -0.3];
        let x1 = SparseVector::from_dense(&[1.0, 0.0, -0.5, 0.2, 0.0]);
        let x2 = SparseVector::from_dense(&[0.0, 0.7, 0.0, -1.0, 0.4]);
        let y1 = [1.0, 0.0];
        let y2 = [0.0, 1.0];
        let xs = [&x1, &x2];
        let ys: [&[f64]; 2] = [&y1, &y2];
        let (_, g) = head.loss_and_gradient(&xs, &ys);
        let h = 1e-6;
        for k in 0..2 {
            for i in 0..5 {
                let mut p = head.clone();
                p.weights[k][i] += h;
                let mut m = head.clone();
                m.weights[k][i] -= h;
                let num = (p.loss(&xs, &ys) - m.loss(&xs, &ys)) / (2.0 * h);
                assert!((num - g.weights[k][i]).abs() < 1e-8, "{num} vs {}", g.weights[k][i]);
            }
        }
    }

    #[test]
    fn adam_first_step_moves_by_lr() {
        let mut head = LinearHead::zeros(1, 2);
        let mut opt = Adam::new(&head);
        let g = HeadGradient {
            weights: vec![vec![0.5, -2.0]],
            bias: vec![0.0],
        };
        opt.step(&mut head, &g, 0.1);
        assert!((head.weights[0][0] + 0.1).abs() < 1e-6);
        assert!((head.weights[0][1] - 0.1).abs() < 1e-6);
        assert_eq!(head.bias[0], 0.0);
    }
}
