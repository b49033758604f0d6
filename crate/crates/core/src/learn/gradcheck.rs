use rand::seq::index;

use super::{batch_gradient, Example, Model};
use crate::error::Result;
use crate::seeds::SeedStreams;

/// Denominator floor for relative gradient errors.
const DENOM_FLOOR: f64 = 1e-8;

fn mean_loss<M: Model>(model: &M, sample: &[Example]) -> Result<f64> {
    let mut sum = 0.0;
    for ex in sample {
        sum += model.predict(&ex.seq)?.squared_error(ex.target);
    }
    Ok(sum / sample.len().max(1) as f64)
}

/// Largest relative difference between the analytic gradient of the mean
/// squared error on `sample` and five-point central differences with step
/// `eps_fd`, over every parameter.
///
/// The five-point stencil has `O(h⁴)` truncation error. The plain two-point
/// difference is too coarse for embeddings near the origin, where the
/// normalized angle has large curvature.
pub fn grad_check<M: Model>(model: &M, sample: &[Example], eps_fd: f64) -> Result<f64> {
    let all: Vec<usize> = (0..model.num_params()).collect();
    check_indices(model, sample, eps_fd, &all)
}

/// As [`grad_check`], over `count` parameters drawn without replacement.
pub fn grad_check_subsample<M: Model>(
    model: &M,
    sample: &[Example],
    eps_fd: f64,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let n = model.num_params();
    let mut rng = SeedStreams::new(seed).rng("gradcheck");
    let mut picked = index::sample(&mut rng, n, count.min(n)).into_vec();
    picked.sort_unstable();
    check_indices(model, sample, eps_fd, &picked)
}

fn check_indices<M: Model>(
    model: &M,
    sample: &[Example],
    eps_fd: f64,
    indices: &[usize],
) -> Result<f64> {
    let refs: Vec<&Example> = sample.iter().collect();
    let (_, analytic) = batch_gradient(model, &refs)?;
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for &i in indices {
        let orig = probe.params()[i];
        let mut at = |offset: f64| {
            probe.params_mut()[i] = orig + offset;
            mean_loss(&probe, sample)
        };
        let (p1, m1, p2, m2) = (
            at(eps_fd)?,
            at(-eps_fd)?,
            at(2.0 * eps_fd)?,
            at(-2.0 * eps_fd)?,
        );
        probe.params_mut()[i] = orig;
        let numeric = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * eps_fd);
        let rel =
            (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(DENOM_FLOOR);
        worst = worst.max(rel);
    }
    Ok(worst)
}
