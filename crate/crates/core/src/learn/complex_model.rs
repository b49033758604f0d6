use std::f64::consts::PI;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::logpolar::{logpolar_mul, LogPolarComplex};
use super::{Model, Value};
use crate::error::{Error, Result};

/// How the pooled components become an output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Affine map of the concatenated `(r, a, b)` vectors to a scalar.
    Dense,
    /// `Σⱼ e^{rⱼ} aⱼ`: the real part of the summed complex components.
    SumReal,
    /// `Σⱼ e^{rⱼ}(aⱼ + i bⱼ)`.
    SumComplex,
}

/// A complex diagonal multiset automaton with `k` states, read out by a head.
///
/// Symbol `s` owns `k` complex weights `e^{r}(a + bi)`; a multiset's
/// representation is their componentwise product, started from the initial
/// weights (the identity unless `learn_lambda`).
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMultisetModel {
    vocab: usize,
    k: usize,
    head: Head,
    learn_lambda: bool,
    params: Vec<f64>,
}

const INIT_SCALE: f64 = 0.05;

/// Offsets of each parameter group in the flat vector.
struct Layout {
    er: usize,
    ea: usize,
    eb: usize,
    lambda: Option<usize>,
    dense: Option<usize>,
    total: usize,
}

impl Layout {
    fn new(vocab: usize, k: usize, head: Head, learn_lambda: bool) -> Self {
        let table = vocab * k;
        let mut next = 3 * table;
        let lambda = learn_lambda.then(|| {
            next += 3 * k;
            next - 3 * k
        });
        let dense = (head == Head::Dense).then(|| {
            next += 3 * k + 1;
            next - 3 * k - 1
        });
        Self {
            er: 0,
            ea: table,
            eb: 2 * table,
            lambda,
            dense,
            total: next,
        }
    }
}

impl ComplexMultisetModel {
    /// Randomly initialized: log-moduli uniform in ±0.05, angles uniform with
    /// `(a, b)` of norm 0.05, dense weights Glorot-uniform, zero bias,
    /// identity initial weights.
    ///
    /// The small `(a, b)` norm makes early angle updates large. A fixed norm
    /// keeps every embedding away from the origin, where the angle is
    /// undefined.
    pub fn new(
        vocab: usize,
        k: usize,
        head: Head,
        learn_lambda: bool,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if vocab == 0 || k == 0 {
            return Err(Error::InvalidArgument(
                "vocabulary and width must be positive".into(),
            ));
        }
        let layout = Layout::new(vocab, k, head, learn_lambda);
        let mut params = vec![0.0; layout.total];
        let table = vocab * k;
        for i in 0..table {
            let angle: f64 = rng.random_range(-PI..PI);
            params[layout.er + i] = rng.random_range(-INIT_SCALE..INIT_SCALE);
            params[layout.ea + i] = INIT_SCALE * angle.cos();
            params[layout.eb + i] = INIT_SCALE * angle.sin();
        }
        if let Some(l) = layout.lambda {
            params[l + k..l + 2 * k].fill(1.0);
        }
        if let Some(d) = layout.dense {
            let limit = (6.0 / (3 * k + 1) as f64).sqrt();
            for p in &mut params[d..d + 3 * k] {
                *p = rng.random_range(-limit..limit);
            }
        }
        Ok(Self {
            vocab,
            k,
            head,
            learn_lambda,
            params,
        })
    }

    pub fn from_params(
        vocab: usize,
        k: usize,
        head: Head,
        learn_lambda: bool,
        params: Vec<f64>,
    ) -> Result<Self> {
        let expected = Self::param_count(vocab, k, head, learn_lambda);
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
            k,
            head,
            learn_lambda,
            params,
        })
    }

    /// `3·vocab·k` embedding weights, plus `3k` initial weights when learned,
    /// plus `3k + 1` for the dense head.
    pub fn param_count(vocab: usize, k: usize, head: Head, learn_lambda: bool) -> usize {
        Layout::new(vocab, k, head, learn_lambda).total
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn learn_lambda(&self) -> bool {
        self.learn_lambda
    }

    fn layout(&self) -> Layout {
        Layout::new(self.vocab, self.k, self.head, self.learn_lambda)
    }

    /// Component `j` of symbol `s`, projected onto the unit circle.
    pub fn embedding(&self, s: usize, j: usize) -> LogPolarComplex {
        let l = self.layout();
        let i = s * self.k + j;
        LogPolarComplex::normalized(
            self.params[l.er + i],
            self.params[l.ea + i],
            self.params[l.eb + i],
        )
    }

    pub fn initial_weight(&self, j: usize) -> LogPolarComplex {
        match self.layout().lambda {
            Some(l) => {
                let k = self.k;
                LogPolarComplex::normalized(
                    self.params[l + j],
                    self.params[l + k + j],
                    self.params[l + 2 * k + j],
                )
            }
            None => LogPolarComplex::ONE,
        }
    }

    /// The pooled representation: per component, the product of the initial
    /// weight and every symbol's weight, multiplied in sorted symbol order.
    pub fn pooled(&self, seq: &[usize]) -> Result<Vec<LogPolarComplex>> {
        self.check_symbols(seq)?;
        let mut sorted = seq.to_vec();
        sorted.sort_unstable();
        let l = self.layout();
        let k = self.k;
        let mut acc: Vec<LogPolarComplex> = (0..k).map(|j| self.initial_weight(j)).collect();
        for &s in &sorted {
            let base = s * k;
            for (j, z) in acc.iter_mut().enumerate() {
                let i = base + j;
                let e = LogPolarComplex::normalized(
                    self.params[l.er + i],
                    self.params[l.ea + i],
                    self.params[l.eb + i],
                );
                *z = logpolar_mul(*z, e);
            }
        }
        Ok(acc)
    }

    fn readout(&self, pooled: &[LogPolarComplex]) -> Value {
        match self.head {
            Head::Dense => {
                let d = self.layout().dense.expect("dense head has weights");
                let k = self.k;
                let w = &self.params[d..d + 3 * k];
                let mut out = self.params[d + 3 * k];
                for (j, z) in pooled.iter().enumerate() {
                    out += w[j] * z.r + w[k + j] * z.a + w[2 * k + j] * z.b;
                }
                Value::Real(out)
            }
            Head::SumReal => Value::Real(pooled.iter().map(|z| z.r.exp() * z.a).sum()),
            Head::SumComplex => {
                let (re, im) = pooled.iter().fold((0.0, 0.0), |(re, im), z| {
                    let m = z.r.exp();
                    (re + m * z.a, im + m * z.b)
                });
                Value::Complex([re, im])
            }
        }
    }

    /// Adds `c·g_r` to the `r` slot and the angle gradient `c·g_θ`, mapped
    /// through `θ = atan2(b, a)`, to the raw `(a, b)` slots.
    fn push_polar_grad(
        grad: &mut [f64],
        params: &[f64],
        (ir, ia, ib): (usize, usize, usize),
        g_r: f64,
        g_theta: f64,
    ) {
        grad[ir] += g_r;
        let (a, b) = (params[ia], params[ib]);
        let n2 = a * a + b * b;
        if n2 > 0.0 {
            grad[ia] -= g_theta * b / n2;
            grad[ib] += g_theta * a / n2;
        }
    }
}

impl Model for ComplexMultisetModel {
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
        let l = self.layout();
        let (t, k) = (self.vocab * self.k, self.k);
        let mut groups = vec![
            ("embed_r", l.er..l.er + t),
            ("embed_a", l.ea..l.ea + t),
            ("embed_b", l.eb..l.eb + t),
        ];
        if let Some(o) = l.lambda {
            groups.extend([
                ("lambda_r", o..o + k),
                ("lambda_a", o + k..o + 2 * k),
                ("lambda_b", o + 2 * k..o + 3 * k),
            ]);
        }
        if let Some(d) = l.dense {
            groups.extend([
                ("dense_w", d..d + 3 * k),
                ("dense_bias", d + 3 * k..d + 3 * k + 1),
            ]);
        }
        groups
    }

    fn predict(&self, seq: &[usize]) -> Result<Value> {
        Ok(self.readout(&self.pooled(seq)?))
    }

    fn accumulate_gradient(
        &self,
        seq: &[usize],
        target: Value,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        let pooled = self.pooled(seq)?;
        let out = self.readout(&pooled);
        let err = out.to_complex() - target.to_complex();
        let loss = err.norm_sqr();
        let (g_re, g_im) = (2.0 * err.re * scale, 2.0 * err.im * scale);
        let l = self.layout();
        let k = self.k;

        // Gradients with respect to each pooled component's r and angle.
        let mut g_r = vec![0.0; k];
        let mut g_theta = vec![0.0; k];
        match self.head {
            Head::Dense => {
                let d = l.dense.expect("dense head has weights");
                for (j, z) in pooled.iter().enumerate() {
                    let (wr, wa, wb) = (
                        self.params[d + j],
                        self.params[d + k + j],
                        self.params[d + 2 * k + j],
                    );
                    g_r[j] = g_re * wr;
                    g_theta[j] = g_re * (wb * z.a - wa * z.b);
                    grad[d + j] += g_re * z.r;
                    grad[d + k + j] += g_re * z.a;
                    grad[d + 2 * k + j] += g_re * z.b;
                }
                grad[d + 3 * k] += g_re;
            }
            Head::SumReal => {
                for (j, z) in pooled.iter().enumerate() {
                    let m = z.r.exp();
                    g_r[j] = g_re * m * z.a;
                    g_theta[j] = -g_re * m * z.b;
                }
            }
            Head::SumComplex => {
                for (j, z) in pooled.iter().enumerate() {
                    let m = z.r.exp();
                    g_r[j] = m * (g_re * z.a + g_im * z.b);
                    g_theta[j] = m * (g_im * z.a - g_re * z.b);
                }
            }
        }

        if let Some(o) = l.lambda {
            for j in 0..k {
                Self::push_polar_grad(
                    grad,
                    &self.params,
                    (o + j, o + k + j, o + 2 * k + j),
                    g_r[j],
                    g_theta[j],
                );
            }
        }
        let mut sorted = seq.to_vec();
        sorted.sort_unstable();
        for run in sorted.chunk_by(|x, y| x == y) {
            let (s, c) = (run[0], run.len() as f64);
            for j in 0..k {
                let i = s * k + j;
                Self::push_polar_grad(
                    grad,
                    &self.params,
                    (l.er + i, l.ea + i, l.eb + i),
                    c * g_r[j],
                    c * g_theta[j],
                );
            }
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(head: Head, learn_lambda: bool) -> ComplexMultisetModel {
        ComplexMultisetModel::new(
            11,
            50,
            head,
            learn_lambda,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap()
    }

    #[test]
    fn parameter_count_for_eleven_symbols() {
        assert_eq!(model(Head::Dense, false).num_params(), 1801);
        assert_eq!(
            ComplexMultisetModel::param_count(11, 50, Head::Dense, true),
            1951
        );
        assert_eq!(
            ComplexMultisetModel::param_count(5, 4, Head::SumComplex, true),
            72
        );
    }

    #[test]
    fn empty_input_reads_identity() {
        let mut m = model(Head::Dense, false);
        let d = m
            .param_groups()
            .iter()
            .find(|g| g.0 == "dense_w")
            .unwrap()
            .1
            .clone();
        let p = m.params_mut();
        p[d.clone()].fill(0.0);
        p[d.start + 50..d.start + 100].fill(1.0 / 50.0);
        p[d.end] = 0.0;
        assert!((m.predict(&[]).unwrap().re() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_symbol_is_its_embedding() {
        let m = model(Head::SumComplex, false);
        let pooled = m.pooled(&[3]).unwrap();
        for (j, z) in pooled.iter().enumerate() {
            let e = m.embedding(3, j);
            assert!(
                (z.r - e.r).abs() < 1e-15 && (z.a - e.a).abs() < 1e-15 && (z.b - e.b).abs() < 1e-15
            );
        }
    }

    #[test]
    fn order_does_not_matter_bitwise() {
        let m = model(Head::Dense, true);
        let a = m.predict(&[1, 5, 2, 9, 9, 3]).unwrap();
        let b = m.predict(&[9, 3, 2, 9, 1, 5]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_symbol_rejected() {
        assert!(matches!(
            model(Head::Dense, false).predict(&[11]),
            Err(Error::UnknownSymbol(_))
        ));
    }
}
