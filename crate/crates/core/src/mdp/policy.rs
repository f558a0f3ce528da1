use rand::Rng;

use crate::error::{param_err, Result};
use crate::Scalar;

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax<T: Scalar>(row: &[T]) -> usize {
    let mut best = 0;
    for (a, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = a;
        }
    }
    best
}

/// With probability `epsilon` a uniformly random action, otherwise the
/// greedy action (lowest-index tie-break).
pub fn epsilon_greedy_select<T: Scalar, R: Rng + ?Sized>(q_row: &[T], epsilon: f64, rng: &mut R) -> Result<usize> {
    if q_row.is_empty() {
        return param_err("cannot select from an empty action row");
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return param_err(format!("epsilon must lie in [0, 1], got {epsilon}"));
    }
    if rng.random::<f64>() < epsilon {
        Ok(rng.random_range(0..q_row.len()))
    } else {
        Ok(argmax(q_row))
    }
}
