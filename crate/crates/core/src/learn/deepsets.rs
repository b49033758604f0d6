use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Model, Value};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Relu => x.max(0.0),
        }
    }

    /// Derivative expressed through the output `y = f(x)`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => f64::from(u8::from(y > 0.0)),
        }
    }
}

/// Real sum-pooling baseline: embed each symbol, apply a dense layer with an
/// activation, sum over the multiset, then an affine map to a scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct DeepSetsBaseline {
    vocab: usize,
    embed_dim: usize,
    hidden: usize,
    activation: Activation,
    params: Vec<f64>,
}

impl DeepSetsBaseline {
    pub const EMBED_DIM: usize = 100;
    pub const HIDDEN: usize = 30;

    /// Embeddings uniform in ±0.05, Glorot-uniform dense weights, zero biases.
    pub fn new(
        vocab: usize,
        embed_dim: usize,
        hidden: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if vocab == 0 || embed_dim == 0 || hidden == 0 {
            return Err(Error::InvalidArgument(
                "vocabulary and layer widths must be positive".into(),
            ));
        }
        let mut m = Self {
            vocab,
            embed_dim,
            hidden,
            activation,
            params: vec![0.0; Self::param_count(vocab, embed_dim, hidden)],
        };
        let (e, w1, _, w2, _) = m.offsets();
        for p in &mut m.params[e..e + vocab * embed_dim] {
            *p = rng.random_range(-0.05..0.05);
        }
        let l1 = (6.0 / (embed_dim + hidden) as f64).sqrt();
        for p in &mut m.params[w1..w1 + embed_dim * hidden] {
            *p = rng.random_range(-l1..l1);
        }
        let l2 = (6.0 / (hidden + 1) as f64).sqrt();
        for p in &mut m.params[w2..w2 + hidden] {
            *p = rng.random_range(-l2..l2);
        }
        Ok(m)
    }

    /// The standard widths: embedding 100, hidden 30, tanh.
    pub fn standard(vocab: usize, rng: &mut impl Rng) -> Result<Self> {
        Self::new(vocab, Self::EMBED_DIM, Self::HIDDEN, Activation::Tanh, rng)
    }

    pub fn from_params(
        vocab: usize,
        embed_dim: usize,
        hidden: usize,
        activation: Activation,
        params: Vec<f64>,
    ) -> Result<Self> {
        let expected = Self::param_count(vocab, embed_dim, hidden);
        if params.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(Self {
            vocab,
            embed_dim,
            hidden,
            activation,
            params,
        })
    }

    /// `vocab·e + (e·h + h) + (h + 1)`.
    pub fn param_count(vocab: usize, embed_dim: usize, hidden: usize) -> usize {
        vocab * embed_dim + embed_dim * hidden + hidden + hidden + 1
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Offsets of embeddings, first weights (e×h, row-major), first bias,
    /// output weights and output bias.
    fn offsets(&self) -> (usize, usize, usize, usize, usize) {
        let e = 0;
        let w1 = self.vocab * self.embed_dim;
        let b1 = w1 + self.embed_dim * self.hidden;
        let w2 = b1 + self.hidden;
        (e, w1, b1, w2, w2 + self.hidden)
    }

    /// Hidden activations for symbol `s`.
    fn hidden_of(&self, s: usize) -> Vec<f64> {
        let (_, w1, b1, _, _) = self.offsets();
        let h = self.hidden;
        let emb = &self.params[s * self.embed_dim..(s + 1) * self.embed_dim];
        let mut z = self.params[b1..b1 + h].to_vec();
        for (i, x) in emb.iter().enumerate() {
            let row = &self.params[w1 + i * h..w1 + (i + 1) * h];
            for (zj, w) in z.iter_mut().zip(row) {
                *zj += x * w;
            }
        }
        z.iter_mut().for_each(|v| *v = self.activation.apply(*v));
        z
    }

    /// Distinct symbols with their counts, in sorted order.
    fn runs(seq: &[usize]) -> Vec<(usize, f64)> {
        let mut sorted = seq.to_vec();
        sorted.sort_unstable();
        sorted
            .chunk_by(|x, y| x == y)
            .map(|r| (r[0], r.len() as f64))
            .collect()
    }

    /// The pooled hidden vector `Σ_s count(s)·f(W₁ᵀe_s + b₁)`, summed in
    /// sorted symbol order.
    pub fn pooled(&self, seq: &[usize]) -> Result<Vec<f64>> {
        self.check_symbols(seq)?;
        let mut sum = vec![0.0; self.hidden];
        for (s, c) in Self::runs(seq) {
            for (acc, v) in sum.iter_mut().zip(self.hidden_of(s)) {
                *acc += c * v;
            }
        }
        Ok(sum)
    }

    fn readout(&self, pooled: &[f64]) -> f64 {
        let (_, _, _, w2, b2) = self.offsets();
        self.params[b2]
            + pooled
                .iter()
                .zip(&self.params[w2..w2 + self.hidden])
                .map(|(x, w)| x * w)
                .sum::<f64>()
    }
}

impl Model for DeepSetsBaseline {
    fn vocab(&self) -> usize {
        self.vocab
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn param_groups(&self) -> Vec<(&'static str, Range<usize>)> {
        let (e, w1, b1, w2, b2) = self.offsets();
        vec![
            ("embed", e..w1),
            ("dense1_w", w1..b1),
            ("dense1_b", b1..w2),
            ("out_w", w2..b2),
            ("out_b", b2..b2 + 1),
        ]
    }

    fn predict(&self, seq: &[usize]) -> Result<Value> {
        Ok(Value::Real(self.readout(&self.pooled(seq)?)))
    }

    fn accumulate_gradient(
        &self,
        seq: &[usize],
        target: Value,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        self.check_symbols(seq)?;
        let runs = Self::runs(seq);
        let hiddens: Vec<Vec<f64>> = runs.iter().map(|&(s, _)| self.hidden_of(s)).collect();
        let mut pooled = vec![0.0; self.hidden];
        for ((_, c), hv) in runs.iter().zip(&hiddens) {
            for (acc, v) in pooled.iter_mut().zip(hv) {
                *acc += c * v;
            }
        }
        let out = self.readout(&pooled);
        let err = out - target.re();
        let g = 2.0 * err * scale;

        let (_, w1, b1, w2, b2) = self.offsets();
        let (h, e) = (self.hidden, self.embed_dim);
        grad[b2] += g;
        for (j, p) in pooled.iter().enumerate() {
            grad[w2 + j] += g * p;
        }
        for ((s, c), hv) in runs.iter().zip(&hiddens) {
            let dz: Vec<f64> = hv
                .iter()
                .enumerate()
                .map(|(j, &y)| {
                    c * g * self.params[w2 + j] * self.activation.derivative_from_output(y)
                })
                .collect();
            for (j, d) in dz.iter().enumerate() {
                grad[b1 + j] += d;
            }
            let emb = s * e;
            for i in 0..e {
                let x = self.params[emb + i];
                let row = w1 + i * h;
                let mut de = 0.0;
                for (j, d) in dz.iter().enumerate() {
                    grad[row + j] += x * d;
                    de += self.params[row + j] * d;
                }
                grad[emb + i] += de;
            }
        }
        Ok(Value::Real(out).squared_error(target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> DeepSetsBaseline {
        DeepSetsBaseline::standard(11, &mut ChaCha8Rng::seed_from_u64(1)).unwrap()
    }

    #[test]
    fn parameter_count_for_eleven_symbols() {
        assert_eq!(model().num_params(), 4161);
        assert_eq!(DeepSetsBaseline::param_count(10, 100, 30), 4061);
    }

    #[test]
    fn empty_input_is_output_bias() {
        let mut m = model();
        let b2 = m.num_params() - 1;
        m.params_mut()[b2] = 0.75;
        assert_eq!(m.predict(&[]).unwrap(), Value::Real(0.75));
    }

    #[test]
    fn order_does_not_matter_bitwise() {
        let m = model();
        assert_eq!(
            m.predict(&[4, 4, 1, 7, 2]).unwrap(),
            m.predict(&[2, 7, 4, 1, 4]).unwrap()
        );
    }
}
