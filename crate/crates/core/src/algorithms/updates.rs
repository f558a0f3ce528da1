use rand::Rng;

use crate::error::{param_err, LabError, Result};
use crate::mdp::{argmax, Backup, QTable, TabularMdp, TwoStepSample};
use crate::Scalar;

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return param_err(format!("step size must lie in [0, 1], got {alpha}"));
    }
    Ok(())
}

fn check_theta<T: Scalar>(theta: T) -> Result<()> {
    if !(theta.abs() <= T::one()) {
        return param_err(format!("|theta| must not exceed 1, got {theta}"));
    }
    Ok(())
}

/// Shared affine step `(1 − α)·old + α·target`.
#[inline]
fn blend<T: Scalar>(old: T, alpha: T, target: T) -> T {
    (T::one() - alpha) * old + alpha * target
}

fn write<T: Scalar>(q: &mut QTable<T>, i: usize, a: usize, value: T) -> Result<()> {
    if !value.is_finite() {
        return Err(LabError::Numeric(format!("update of ({i},{a}) produced {value}")));
    }
    q.set(i, a, value);
    q.bump_count(i, a);
    Ok(())
}

/// One-step Q-learning:
/// `Q(i,a) ← (1−α)Q(i,a) + α(r + β·max_b Q(j,b))`.
pub fn ql_update<T: Scalar>(
    q: &mut QTable<T>,
    i: usize,
    a: usize,
    j: usize,
    r: T,
    alpha: T,
    beta: T,
) -> Result<()> {
    q.check_indices(i, a, j)?;
    check_alpha(alpha)?;
    let target = r + beta * q.bootstrap(j, Backup::Max);
    let value = blend(q.get(i, a), alpha, target);
    write(q, i, a, value)
}

/// Two-step update with an arbitrary successor backup:
///
/// `Q(i,a) ← (1−α)Q(i,a) + α[r1 + β·B(Q(j,·)) + βθ(r2 + β·B(Q(k,·)))]`
///
/// Both backups read the pre-update table.
pub fn two_step_update<T: Scalar>(
    q: &mut QTable<T>,
    s: &TwoStepSample<T>,
    alpha: T,
    theta: T,
    beta: T,
    backup: Backup<T>,
) -> Result<()> {
    q.check_indices(s.i, s.a, s.j)?;
    q.check_indices(s.j, s.d, s.k)?;
    check_alpha(alpha)?;
    check_theta(theta)?;
    backup.check()?;
    let first = s.r1 + beta * q.bootstrap(s.j, backup);
    let second = s.r2 + beta * q.bootstrap(s.k, backup);
    let target = first + beta * theta * second;
    let value = blend(q.get(s.i, s.a), alpha, target);
    write(q, s.i, s.a, value)
}

/// Two-step Q-learning (TSQL) update.
pub fn tsql_update<T: Scalar>(q: &mut QTable<T>, s: &TwoStepSample<T>, alpha: T, theta: T, beta: T) -> Result<()> {
    two_step_update(q, s, alpha, theta, beta, Backup::Max)
}

/// Smooth two-step Q-learning (S-TSQL): TSQL with each max replaced by the
/// stable log-sum-exp at temperature `n`.
pub fn stsql_update<T: Scalar>(
    q: &mut QTable<T>,
    s: &TwoStepSample<T>,
    alpha: T,
    theta: T,
    beta: T,
    n: T,
) -> Result<()> {
    two_step_update(q, s, alpha, theta, beta, Backup::lse(n)?)
}

/// Successive over-relaxation Q-learning:
/// `Q(i,a) ← (1−α)Q(i,a) + α[w(r + β·max_b Q(j,b)) + (1−w)·max_b Q(i,b)]`.
#[allow(clippy::too_many_arguments)]
pub fn sorql_update<T: Scalar>(
    q: &mut QTable<T>,
    i: usize,
    a: usize,
    j: usize,
    r: T,
    alpha: T,
    beta: T,
    w: T,
) -> Result<()> {
    q.check_indices(i, a, j)?;
    check_alpha(alpha)?;
    if !(w > T::zero()) || !w.is_finite() {
        return param_err(format!("relaxation weight must be positive, got {w}"));
    }
    let own = q.bootstrap(i, Backup::Max);
    let target = w * (r + beta * q.bootstrap(j, Backup::Max)) + (T::one() - w) * own;
    let value = blend(q.get(i, a), alpha, target);
    write(q, i, a, value)
}

/// Relaxation weight `1 / (1 − β·min_{i,a} p(i|i,a))` computed from the true model.
pub fn sorql_weight<T: Scalar>(mdp: &TabularMdp<T>) -> T {
    T::one() / (T::one() - mdp.discount() * mdp.min_self_loop())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    A,
    B,
}

/// Pair of estimators for double Q-learning.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleQState<T> {
    pub qa: QTable<T>,
    pub qb: QTable<T>,
}

impl<T: Scalar> DoubleQState<T> {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        DoubleQState { qa: QTable::new(num_states, num_actions), qb: QTable::new(num_states, num_actions) }
    }

    pub fn for_mdp(mdp: &TabularMdp<T>) -> Self {
        DoubleQState { qa: QTable::for_mdp(mdp), qb: QTable::for_mdp(mdp) }
    }

    /// `(Qᴬ(i,·) + Qᴮ(i,·)) / 2`
    pub fn average_row(&self, i: usize) -> Vec<T> {
        let half = T::of(0.5);
        self.qa.row(i).iter().zip(self.qb.row(i)).map(|(&x, &y)| (x + y) * half).collect()
    }

    pub fn average_table(&self) -> QTable<T> {
        let half = T::of(0.5);
        let values = self.qa.values().iter().zip(self.qb.values()).map(|(&x, &y)| (x + y) * half).collect();
        self.qa.with_values(values)
    }
}

/// Updates one estimator, bootstrapping through the other at the updated
/// estimator's greedy action in `j`.
#[allow(clippy::too_many_arguments)]
pub fn double_q_update_with<T: Scalar>(
    st: &mut DoubleQState<T>,
    which: Estimator,
    i: usize,
    a: usize,
    j: usize,
    r: T,
    alpha: T,
    beta: T,
) -> Result<()> {
    check_alpha(alpha)?;
    let (upd, eval) = match which {
        Estimator::A => (&mut st.qa, &st.qb),
        Estimator::B => (&mut st.qb, &st.qa),
    };
    upd.check_indices(i, a, j)?;
    let next = if upd.is_absorbing(j) { T::zero() } else { eval.get(j, argmax(upd.row(j))) };
    let value = blend(upd.get(i, a), alpha, r + beta * next);
    write(upd, i, a, value)
}

/// Double Q-learning: a fair coin picks which estimator to update.
#[allow(clippy::too_many_arguments)]
pub fn double_q_update<T: Scalar, R: Rng + ?Sized>(
    st: &mut DoubleQState<T>,
    i: usize,
    a: usize,
    j: usize,
    r: T,
    alpha: T,
    beta: T,
    rng: &mut R,
) -> Result<Estimator> {
    let which = if rng.random_bool(0.5) { Estimator::A } else { Estimator::B };
    double_q_update_with(st, which, i, a, j, r, alpha, beta)?;
    Ok(which)
}

/// Double Q-learning with doubled step size `min(2α, 1)`. Action selection
/// for this method reads [`DoubleQState::average_row`].
#[allow(clippy::too_many_arguments)]
pub fn dq_avg_update<T: Scalar, R: Rng + ?Sized>(
    st: &mut DoubleQState<T>,
    i: usize,
    a: usize,
    j: usize,
    r: T,
    alpha: T,
    beta: T,
    rng: &mut R,
) -> Result<Estimator> {
    check_alpha(alpha)?;
    let doubled = (alpha + alpha).min(T::one());
    double_q_update(st, i, a, j, r, doubled, beta, rng)
}
