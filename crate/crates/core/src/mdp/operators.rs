use crate::error::{param_err, LabError, Result};
use crate::mdp::{QTable, TabularMdp, ValueFunction};
use crate::Scalar;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITERS: usize = 1_000_000;

/// How a successor row `Q(j, ·)` is collapsed into a single bootstrap value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backup<T> {
    /// `max_b Q(j, b)`
    Max,
    /// `(1/N) log Σ_b exp(N·Q(j, b))` with temperature `N > 0`.
    LogSumExp(T),
}

impl<T: Scalar> Backup<T> {
    pub fn lse(n: T) -> Result<Self> {
        if !(n > T::zero()) || !n.is_finite() {
            return param_err(format!("log-sum-exp temperature must be positive and finite, got {n}"));
        }
        Ok(Backup::LogSumExp(n))
    }

    /// Reduces a non-empty finite row. Temperature validity is the caller's
    /// responsibility (see [`Backup::lse`]).
    #[inline]
    pub fn reduce(&self, row: &[T]) -> T {
        match *self {
            Backup::Max => row.iter().copied().fold(T::neg_infinity(), T::max),
            Backup::LogSumExp(n) => lse_shifted(row, n),
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        match *self {
            Backup::Max => Ok(()),
            Backup::LogSumExp(n) => Backup::lse(n).map(|_| ()),
        }
    }
}

#[inline]
fn lse_shifted<T: Scalar>(v: &[T], n: T) -> T {
    let e = v.iter().copied().fold(T::neg_infinity(), T::max);
    let s: T = v.iter().map(|&x| (n * (x - e)).exp()).sum();
    s.ln() / n + e
}

/// `(1/N) log Σ exp(N·vᵢ)` evaluated as `(1/N) log Σ exp(N(vᵢ − e)) + e`
/// with `e = max v`, so no term exceeds `exp(0)`.
pub fn stable_logsumexp<T: Scalar>(v: &[T], n: T) -> Result<T> {
    if v.is_empty() {
        return param_err("log-sum-exp of an empty vector");
    }
    if v.iter().any(|x| x.is_nan()) {
        return Err(LabError::Numeric("log-sum-exp input contains NaN".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LabError::Numeric("log-sum-exp input is not finite".into()));
    }
    Backup::lse(n)?;
    Ok(lse_shifted(v, n))
}

/// Exact expected backup `c̄(i,a) + β Σ_j p(j|i,a)·backup(Q(j,·))`.
pub fn apply_backup<T: Scalar>(mdp: &TabularMdp<T>, q: &QTable<T>, backup: Backup<T>) -> Result<QTable<T>> {
    q.check_shape(mdp)?;
    backup.check()?;
    let s = mdp.num_states();
    let beta = mdp.discount();
    let next: Vec<T> = (0..s)
        .map(|j| if mdp.is_terminal(j) { T::zero() } else { backup.reduce(q.row(j)) })
        .collect();
    let mut out = Vec::with_capacity(s * mdp.num_actions());
    for i in 0..s {
        for a in 0..mdp.num_actions() {
            if mdp.is_terminal(i) {
                out.push(T::zero());
                continue;
            }
            let expected_next: T = mdp
                .transition_row(i, a)
                .iter()
                .zip(&next)
                .map(|(&p, &v)| p * v)
                .sum();
            out.push(mdp.mean_reward(i, a) + beta * expected_next);
        }
    }
    Ok(q.with_values(out))
}

/// Q-Bellman optimality operator `H`.
pub fn apply_h<T: Scalar>(mdp: &TabularMdp<T>, q: &QTable<T>) -> Result<QTable<T>> {
    apply_backup(mdp, q, Backup::Max)
}

/// Smooth Q-Bellman operator `U` with temperature `n`.
pub fn apply_u<T: Scalar>(mdp: &TabularMdp<T>, q: &QTable<T>, n: T) -> Result<QTable<T>> {
    apply_backup(mdp, q, Backup::lse(n)?)
}

/// Iterates the chosen operator from `Q = 0` until successive iterates are
/// within `tol` in max norm.
///
/// Returns the final table and `V(i) = backup(Q(i,·))` (zero on terminal
/// states).
pub fn value_iteration<T: Scalar>(
    mdp: &TabularMdp<T>,
    backup: Backup<T>,
    tol: T,
    max_iters: usize,
) -> Result<(QTable<T>, ValueFunction<T>)> {
    if !(tol > T::zero()) {
        return param_err(format!("tolerance must be positive, got {tol}"));
    }
    backup.check()?;
    let mut q = QTable::for_mdp(mdp);
    let mut residual = T::infinity();
    for _ in 0..max_iters {
        let next = apply_backup(mdp, &q, backup)?;
        residual = next.sup_distance(&q);
        q = next;
        if residual <= tol {
            let v = (0..mdp.num_states()).map(|i| q.bootstrap(i, backup)).collect();
            return Ok((q, ValueFunction { values: v }));
        }
    }
    Err(LabError::NonConvergence { iterations: max_iters, residual: residual.as_f64() })
}

/// Bound on the distance between the fixed points of `U` and `H`:
/// `β·ln|A| / (N(1 − β))`.
pub fn fixed_point_gap_bound<T: Scalar>(n: T, beta: T, num_actions: usize) -> Result<T> {
    if !(n > T::zero()) {
        return param_err(format!("temperature must be positive, got {n}"));
    }
    if !(beta >= T::zero() && beta < T::one()) {
        return param_err(format!("discount must lie in [0, 1), got {beta}"));
    }
    if num_actions == 0 {
        return param_err("need at least one action");
    }
    Ok(beta * T::of(num_actions as f64).ln() / (n * (T::one() - beta)))
}
