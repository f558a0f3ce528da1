use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LabError, Result};
use crate::mdp::TabularMdp;
use crate::Scalar;

/// Two consecutive transitions `(i, a, j, r1)` and `(j, d, k, r2)` consumed
/// by one two-step update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStepSample<T> {
    pub i: usize,
    pub a: usize,
    pub j: usize,
    pub r1: T,
    pub d: usize,
    pub k: usize,
    pub r2: T,
}

impl<T: Scalar> TwoStepSample<T> {
    /// Sample whose first transition lands in an absorbing state: the
    /// continuation stays put with zero reward.
    pub fn absorbed(i: usize, a: usize, j: usize, r1: T) -> Self {
        TwoStepSample { i, a, j, r1, d: 0, k: j, r2: T::zero() }
    }
}

/// Draws `j ~ p(·|i,a)` by inverse CDF over the row in index order, then the
/// realized reward `c(i,a,j)` plus the channel's Gaussian noise if present.
///
/// Terminal states return `(i, 0)` without consuming randomness.
pub fn sample_transition<T: Scalar, R: Rng + ?Sized>(
    mdp: &TabularMdp<T>,
    i: usize,
    a: usize,
    rng: &mut R,
) -> Result<(usize, T)> {
    mdp.check_indices(i, a)?;
    if mdp.is_terminal(i) {
        return Ok((i, T::zero()));
    }
    let row = mdp.transition_row(i, a);
    let u = T::of(rng.random::<f64>());
    let mut cum = T::zero();
    let mut landed = None;
    for (j, &p) in row.iter().enumerate() {
        cum = cum + p;
        if u < cum {
            landed = Some(j);
            break;
        }
    }
    // u fell into the rounding gap above the last partial sum
    let j = match landed.or_else(|| row.iter().rposition(|&p| p > T::zero())) {
        Some(j) => j,
        None => return Err(LabError::Model(format!("row ({i},{a}) has no mass"))),
    };
    let mut r = mdp.c(i, a, j);
    if let Some(noise) = mdp.noise(i, a, j) {
        let mut z: f64 = rng.sample(StandardNormal);
        if let Some(clip) = mdp.noise_clip() {
            let clip = clip.as_f64();
            z = z.clamp(-clip, clip);
        }
        r = r + noise.mean + noise.std * T::of(z);
    }
    Ok((j, r))
}
