use crate::error::{LabError, Result};
use crate::mdp::{Backup, TabularMdp};
use crate::Scalar;

/// `|S| × |A|` action-value table plus per-pair update counts.
///
/// Rows of absorbing (terminal) states always bootstrap to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable<T> {
    num_states: usize,
    num_actions: usize,
    values: Vec<T>,
    step_counts: Vec<u64>,
    absorbing: Vec<bool>,
}

impl<T: Scalar> QTable<T> {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        QTable {
            num_states,
            num_actions,
            values: vec![T::zero(); num_states * num_actions],
            step_counts: vec![0; num_states * num_actions],
            absorbing: vec![false; num_states],
        }
    }

    /// Zero table shaped for `mdp`, with its terminal states marked absorbing.
    pub fn for_mdp(mdp: &TabularMdp<T>) -> Self {
        let mut q = Self::new(mdp.num_states(), mdp.num_actions());
        q.absorbing = mdp.terminal_flags().to_vec();
        q
    }

    /// Table from row-major values.
    pub fn from_values(num_states: usize, num_actions: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != num_states * num_actions {
            return Err(LabError::Model(format!(
                "expected {} values, got {}",
                num_states * num_actions,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Numeric("Q-table entries must be finite".into()));
        }
        let mut q = Self::new(num_states, num_actions);
        q.values = values;
        Ok(q)
    }

    /// Same shape and absorbing mask, new values.
    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        QTable {
            num_states: self.num_states,
            num_actions: self.num_actions,
            values,
            step_counts: vec![0; self.step_counts.len()],
            absorbing: self.absorbing.clone(),
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize) -> T {
        self.values[i * self.num_actions + a]
    }

    #[inline]
    pub fn set(&mut self, i: usize, a: usize, v: T) {
        self.values[i * self.num_actions + a] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.num_actions..(i + 1) * self.num_actions]
    }

    pub fn step_count(&self, i: usize, a: usize) -> u64 {
        self.step_counts[i * self.num_actions + a]
    }

    pub(crate) fn bump_count(&mut self, i: usize, a: usize) {
        self.step_counts[i * self.num_actions + a] += 1;
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.absorbing[i]
    }

    pub fn set_absorbing(&mut self, i: usize, absorbing: bool) {
        self.absorbing[i] = absorbing;
    }

    pub fn max_row(&self, i: usize) -> T {
        self.row(i).iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Value of landing in state `j`: zero when absorbing, else the backup
    /// (max or log-sum-exp) of its row.
    #[inline]
    pub fn bootstrap(&self, j: usize, backup: Backup<T>) -> T {
        if self.absorbing[j] {
            T::zero()
        } else {
            backup.reduce(self.row(j))
        }
    }

    /// Greedy value `max_b Q(i, b)` for every state.
    pub fn greedy_values(&self) -> ValueFunction<T> {
        ValueFunction { values: (0..self.num_states).map(|i| self.max_row(i)).collect() }
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &QTable<T>) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub(crate) fn check_indices(&self, i: usize, a: usize, j: usize) -> Result<()> {
        if i >= self.num_states || j >= self.num_states {
            return Err(LabError::Index(format!(
                "state index ({i} or {j}) >= {}",
                self.num_states
            )));
        }
        if a >= self.num_actions {
            return Err(LabError::Index(format!("action {a} >= {}", self.num_actions)));
        }
        Ok(())
    }

    pub(crate) fn check_shape(&self, mdp: &TabularMdp<T>) -> Result<()> {
        if self.num_states != mdp.num_states() || self.num_actions != mdp.num_actions() {
            return Err(LabError::Model(format!(
                "Q-table is {}x{}, model is {}x{}",
                self.num_states,
                self.num_actions,
                mdp.num_states(),
                mdp.num_actions()
            )));
        }
        Ok(())
    }
}

/// State-value function `v(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueFunction<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> ValueFunction<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_distance(&self, other: &ValueFunction<T>) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }
}
