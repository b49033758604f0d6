//! Sinusoidal position encodings as forward weights of a unary automaton.
//!
//! The encoding of position `p` is the forward-weight vector of a real unary
//! automaton after reading `p − 1` symbols. Its transition matrix is
//! block-diagonal with scaled 2×2 rotations, the real form of a complex
//! diagonal automaton whose entries come in conjugate pairs.
//!
//! Each pair of the automaton's forward weights is laid out as
//! `(s rⁿ cos(φ + nθ), s rⁿ sin(φ + nθ))`, whereas the sinusoidal encoding
//! interleaves `(sin, cos)`. With `φ = π/2` and `θ = −ω` the two layouts agree
//! component for component, since `cos(π/2 − nω) = sin nω` and
//! `sin(π/2 − nω) = cos nω`, so [`compare_with_sinusoidal`] needs no
//! reordering.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::automaton::{DiagonalAutomaton, Kind, Multiset, WeightedAutomaton};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CRowVector, CVector};

/// The single symbol of the unary automata built here.
pub const UNARY_SYMBOL: &str = "a";

/// Tolerance used to match conjugate partners.
pub const PAIR_TOL: f64 = 1e-10;

/// One rotation block: amplitude `s`, initial phase `phi`, modulus `r` and
/// angular step `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarPair {
    pub s: f64,
    pub phi: f64,
    pub r: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolarParams {
    pub pairs: Vec<PolarPair>,
}

impl PolarParams {
    pub fn dim(&self) -> usize {
        2 * self.pairs.len()
    }

    fn check(&self) -> Result<()> {
        let finite = self.pairs.iter().all(|p| {
            p.s.is_finite() && p.phi.is_finite() && p.r.is_finite() && p.theta.is_finite()
        });
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite("polar parameters"))
        }
    }
}

fn check_even(d: usize) -> Result<()> {
    if d == 0 || !d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "encoding dimension must be even and positive, got {d}"
        )));
    }
    Ok(())
}

/// Frequency of pair `j` (zero-based): `10000^(−2j/d)`.
fn frequency(j: usize, d: usize) -> f64 {
    10000f64.powf(-2.0 * j as f64 / d as f64)
}

/// `x mod 2π`, computed so large multiples of a step keep their precision.
fn reduce_angle(x: f64) -> f64 {
    x.rem_euclid(TAU)
}

/// The sinusoidal encoding of position `p ≥ 1`: `(sin ω₁(p−1), cos ω₁(p−1), …)`.
pub fn sinusoidal_encoding(p: usize, d: usize) -> Result<Vec<f64>> {
    check_even(d)?;
    if p == 0 {
        return Err(Error::InvalidArgument("positions start at 1".into()));
    }
    let t = (p - 1) as f64;
    let mut out = Vec::with_capacity(d);
    for j in 0..d / 2 {
        let angle = reduce_angle(frequency(j, d) * t);
        out.push(angle.sin());
        out.push(angle.cos());
    }
    Ok(out)
}

/// The real unary automaton with `λ = (s cos φ, s sin φ, …)`, block-diagonal
/// `μ` made of `r·[[cos θ, sin θ], [−sin θ, cos θ]]` and `ρ = (1, 0, …)`.
pub fn polar_automaton(params: &PolarParams) -> Result<WeightedAutomaton> {
    params.check()?;
    let d = params.dim();
    let mut lambda = CRowVector::zeros(d);
    let mut mu = CMatrix::zeros(d, d);
    let mut rho = CVector::zeros(d);
    for (i, p) in params.pairs.iter().enumerate() {
        let k = 2 * i;
        let (phi_sin, phi_cos) = reduce_angle(p.phi).sin_cos();
        let (th_sin, th_cos) = reduce_angle(p.theta).sin_cos();
        lambda[k] = linalg::c(p.s * phi_cos, 0.0);
        lambda[k + 1] = linalg::c(p.s * phi_sin, 0.0);
        mu[(k, k)] = linalg::c(p.r * th_cos, 0.0);
        mu[(k, k + 1)] = linalg::c(p.r * th_sin, 0.0);
        mu[(k + 1, k)] = linalg::c(-p.r * th_sin, 0.0);
        mu[(k + 1, k + 1)] = linalg::c(p.r * th_cos, 0.0);
        rho[k] = linalg::c(1.0, 0.0);
    }
    WeightedAutomaton::new(
        lambda,
        BTreeMap::from([(UNARY_SYMBOL.to_string(), mu)]),
        rho,
        Kind::Multiset,
    )
}

/// The complex diagonal form: `λ = (s e^{iφ}, s e^{−iφ}, …)`,
/// `μ = diag(r e^{iθ}, r e^{−iθ}, …)` and `ρ = (½, ½, …)`.
///
/// It computes the same weights as [`polar_automaton`].
pub fn polar_diagonal(params: &PolarParams) -> Result<DiagonalAutomaton> {
    params.check()?;
    let mut lambda = Vec::with_capacity(params.dim());
    let mut diag = Vec::with_capacity(params.dim());
    for p in &params.pairs {
        let l = Complex64::from_polar(p.s, reduce_angle(p.phi));
        let z = Complex64::from_polar(p.r, reduce_angle(p.theta));
        lambda.extend([l, l.conj()]);
        diag.extend([z, z.conj()]);
    }
    let rho = vec![linalg::c(0.5, 0.0); params.dim()];
    DiagonalAutomaton::new(
        lambda,
        BTreeMap::from([(UNARY_SYMBOL.to_string(), diag)]),
        rho,
    )
}

/// Parameters that make the polar automaton reproduce the sinusoidal
/// encoding: `s = 1`, `φ = π/2`, `r = 1`, `θⱼ = −10000^(−2(j−1)/d)`.
pub fn transformer_params(d: usize) -> Result<PolarParams> {
    check_even(d)?;
    let pairs = (0..d / 2)
        .map(|j| PolarPair {
            s: 1.0,
            phi: FRAC_PI_2,
            r: 1.0,
            theta: -frequency(j, d),
        })
        .collect();
    Ok(PolarParams { pairs })
}

/// Closed-form forward weights after `n` symbols:
/// `(s rⁿ cos(φ + nθ), s rⁿ sin(φ + nθ), …)`.
pub fn polar_forward_closed_form(params: &PolarParams, n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(params.dim());
    for p in &params.pairs {
        let scale = p.s * p.r.powf(n as f64);
        // Reduce θ first so n·θ stays small relative to its rounding error.
        let angle = reduce_angle(p.phi + reduce_angle(n as f64 * reduce_angle(p.theta)));
        out.push(scale * angle.cos());
        out.push(scale * angle.sin());
    }
    out
}

/// Forward weights of a unary automaton after `n` symbols, real parts only.
pub fn unary_forward_weights(m: &WeightedAutomaton, n: usize) -> Result<Vec<f64>> {
    let w = Multiset::from_counts([(UNARY_SYMBOL, n)]);
    Ok(m.forward_weights(&w)?.iter().map(|z| z.re).collect())
}

/// Outcome of comparing the automaton's forward weights with the encodings.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingComparison {
    pub d: usize,
    pub positions: usize,
    pub max_deviation: f64,
    /// Position and component where the deviation peaked.
    pub worst: (usize, usize),
}

/// Runs `polar_automaton(transformer_params(d))` step by step and compares
/// its forward weights before position `p` with `sinusoidal_encoding(p, d)`
/// for `p = 1..=positions`.
pub fn compare_with_sinusoidal(d: usize, positions: usize) -> Result<EncodingComparison> {
    let m = polar_automaton(&transformer_params(d)?)?;
    let mu = m.mu(UNARY_SYMBOL).expect("unary automaton");
    let mut fw = m.lambda().clone();
    let mut cmp = EncodingComparison {
        d,
        positions,
        max_deviation: 0.0,
        worst: (1, 0),
    };
    for p in 1..=positions {
        if p > 1 {
            fw = &fw * mu;
        }
        let enc = sinusoidal_encoding(p, d)?;
        for (i, (z, e)) in fw.iter().zip(&enc).enumerate() {
            let dev = (z.re - e).abs().max(z.im.abs());
            if dev > cmp.max_deviation || dev.is_nan() {
                cmp.max_deviation = if dev.is_nan() { f64::INFINITY } else { dev };
                cmp.worst = (p, i);
            }
        }
    }
    Ok(cmp)
}

/// Converts a diagonal automaton whose entries come in conjugate pairs into
/// an equivalent real automaton.
///
/// States `j` and `j'` pair up when `λ`, `ρ` and every transition diagonal
/// satisfy `x[j'] = conj(x[j])` within [`PAIR_TOL`]. A pair becomes the 2×2
/// block `[[Re z, Im z], [−Im z, Re z]]` with `λ' = (Re l, Im l)` and
/// `ρ' = (2 Re q, −2 Im q)`; a self-conjugate state stays a real 1×1 block.
/// Blocks appear in order of the first state of each pair.
pub fn complex_pairs_to_real(m: &DiagonalAutomaton) -> Result<WeightedAutomaton> {
    let d = m.dim();
    let alphabet: Vec<String> = m.alphabet().into_iter().map(String::from).collect();
    let signature = |j: usize| -> Vec<Complex64> {
        let mut v = vec![m.lambda()[j], m.rho()[j]];
        v.extend(
            alphabet
                .iter()
                .map(|s| m.diagonal(s).expect("symbol in alphabet")[j]),
        );
        v
    };
    let sigs: Vec<Vec<Complex64>> = (0..d).map(signature).collect();
    let conj_close = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .zip(b)
            .all(|(x, y)| (x.conj() - y).norm() <= PAIR_TOL)
    };

    let mut used = vec![false; d];
    let mut blocks: Vec<(usize, Option<usize>)> = Vec::new();
    let mut unmatched = Vec::new();
    for j in 0..d {
        if used[j] {
            continue;
        }
        used[j] = true;
        if sigs[j].iter().all(|z| z.im.abs() <= PAIR_TOL) {
            blocks.push((j, None));
            continue;
        }
        match (j + 1..d).find(|&k| !used[k] && conj_close(&sigs[j], &sigs[k])) {
            Some(k) => {
                used[k] = true;
                blocks.push((j, Some(k)));
            }
            None => unmatched.extend(
                alphabet
                    .iter()
                    .map(|s| m.diagonal(s).expect("symbol in alphabet")[j]),
            ),
        }
    }
    if !unmatched.is_empty() {
        return Err(Error::UnpairedSpectrum(unmatched));
    }

    let real = |x: f64| linalg::c(x, 0.0);
    let mut lambda = CRowVector::zeros(d);
    let mut rho = CVector::zeros(d);
    let mut mu: BTreeMap<String, CMatrix> = alphabet
        .iter()
        .map(|s| (s.clone(), CMatrix::zeros(d, d)))
        .collect();
    let mut k = 0;
    for &(j, partner) in &blocks {
        let (l, q) = (m.lambda()[j], m.rho()[j]);
        match partner {
            None => {
                lambda[k] = real(l.re);
                rho[k] = real(q.re);
                for s in &alphabet {
                    mu.get_mut(s).expect("allocated")[(k, k)] =
                        real(m.diagonal(s).expect("symbol")[j].re);
                }
                k += 1;
            }
            Some(_) => {
                lambda[k] = real(l.re);
                lambda[k + 1] = real(l.im);
                rho[k] = real(2.0 * q.re);
                rho[k + 1] = real(-2.0 * q.im);
                for s in &alphabet {
                    let z = m.diagonal(s).expect("symbol")[j];
                    let b = mu.get_mut(s).expect("allocated");
                    b[(k, k)] = real(z.re);
                    b[(k, k + 1)] = real(z.im);
                    b[(k + 1, k)] = real(-z.im);
                    b[(k + 1, k + 1)] = real(z.re);
                }
                k += 2;
            }
        }
    }
    WeightedAutomaton::new(lambda, mu, rho, Kind::Multiset)
}
