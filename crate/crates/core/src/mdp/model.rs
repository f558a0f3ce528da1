use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::Scalar;

/// Additive Gaussian reward noise on one `(i, a, j)` channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<T> {
    pub mean: T,
    pub std: T,
}

/// Finite-state, finite-action discounted MDP.
///
/// Rewards are a deterministic table `c(i,a,j)` plus an optional Gaussian
/// channel per transition. Terminal states are zero-reward absorbing
/// self-loops whose value is defined to be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp<T> {
    num_states: usize,
    num_actions: usize,
    /// `[i][a][j]`, flattened.
    transition: Vec<T>,
    /// `[i][a][j]`, flattened.
    expected_reward: Vec<T>,
    noise: Vec<Option<NoiseSpec<T>>>,
    discount: T,
    terminal: Vec<bool>,
    c_max: T,
    /// Gaussian draws are clipped to `±clip·std` when set.
    noise_clip: Option<T>,
}

impl<T: Scalar> TabularMdp<T> {
    /// Builds and validates a model. `transition` and `expected_reward` are
    /// flattened `[i][a][j]` arrays.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transition: Vec<T>,
        expected_reward: Vec<T>,
        discount: T,
        terminal: Vec<bool>,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(LabError::Model("need at least one state and one action".into()));
        }
        let len = num_states * num_actions * num_states;
        if transition.len() != len || expected_reward.len() != len {
            return Err(LabError::Model(format!(
                "transition/reward tables must have {len} entries, got {} and {}",
                transition.len(),
                expected_reward.len()
            )));
        }
        if terminal.len() != num_states {
            return Err(LabError::Model(format!(
                "terminal flags must have {num_states} entries, got {}",
                terminal.len()
            )));
        }
        if !(discount >= T::zero() && discount < T::one()) {
            return Err(LabError::Parameter(format!("discount must lie in [0, 1), got {discount}")));
        }
        let c_max = expected_reward
            .iter()
            .fold(T::zero(), |m, &c| m.max(c.abs()));
        let mdp = TabularMdp {
            num_states,
            num_actions,
            transition,
            expected_reward,
            noise: vec![None; len],
            discount,
            terminal,
            c_max,
            noise_clip: None,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    fn row_tolerance(&self) -> T {
        T::of(1e-12).max(T::epsilon() * T::of(8.0 * self.num_states as f64))
    }

    fn validate(&self) -> Result<()> {
        let tol = self.row_tolerance();
        for i in 0..self.num_states {
            for a in 0..self.num_actions {
                let row = self.transition_row(i, a);
                if row.iter().any(|&p| !(p >= T::zero()) || !p.is_finite()) {
                    return Err(LabError::Model(format!("row ({i},{a}) has a negative or non-finite entry")));
                }
                let sum: T = row.iter().copied().sum();
                if (sum - T::one()).abs() > tol {
                    return Err(LabError::Model(format!("row ({i},{a}) sums to {sum}, not 1")));
                }
                if self.reward_row(i, a).iter().any(|c| !c.is_finite()) {
                    return Err(LabError::Model(format!("row ({i},{a}) has a non-finite reward")));
                }
                if self.terminal[i] {
                    if row[i] != T::one() {
                        return Err(LabError::Model(format!("terminal state {i} must self-loop under action {a}")));
                    }
                    if self.reward_row(i, a).iter().any(|&c| c != T::zero()) {
                        return Err(LabError::Model(format!("terminal state {i} must have zero reward")));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn idx(&self, i: usize, a: usize, j: usize) -> usize {
        (i * self.num_actions + a) * self.num_states + j
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn discount(&self) -> T {
        self.discount
    }

    /// Copy of the model with a different discount factor.
    pub fn with_discount(mut self, discount: T) -> Result<Self> {
        if !(discount >= T::zero() && discount < T::one()) {
            return Err(LabError::Parameter(format!("discount must lie in [0, 1), got {discount}")));
        }
        self.discount = discount;
        Ok(self)
    }

    pub fn is_terminal(&self, i: usize) -> bool {
        self.terminal[i]
    }

    pub fn terminal_flags(&self) -> &[bool] {
        &self.terminal
    }

    /// Deterministic-reward bound `max |c(i,a,j)|`.
    pub fn c_max(&self) -> T {
        self.c_max
    }

    pub fn p(&self, i: usize, a: usize, j: usize) -> T {
        self.transition[self.idx(i, a, j)]
    }

    pub fn c(&self, i: usize, a: usize, j: usize) -> T {
        self.expected_reward[self.idx(i, a, j)]
    }

    pub fn transition_row(&self, i: usize, a: usize) -> &[T] {
        let start = self.idx(i, a, 0);
        &self.transition[start..start + self.num_states]
    }

    pub fn reward_row(&self, i: usize, a: usize) -> &[T] {
        let start = self.idx(i, a, 0);
        &self.expected_reward[start..start + self.num_states]
    }

    pub fn noise(&self, i: usize, a: usize, j: usize) -> Option<NoiseSpec<T>> {
        self.noise[self.idx(i, a, j)]
    }

    pub fn has_noise(&self) -> bool {
        self.noise.iter().any(|n| matches!(n, Some(s) if s.std > T::zero()))
    }

    /// Attaches a Gaussian channel to `(i, a, j)`.
    pub fn set_noise(&mut self, i: usize, a: usize, j: usize, spec: NoiseSpec<T>) -> Result<()> {
        self.check_indices(i, a)?;
        if j >= self.num_states {
            return Err(LabError::Index(format!("state {j} >= {}", self.num_states)));
        }
        if !(spec.std >= T::zero()) || !spec.std.is_finite() || !spec.mean.is_finite() {
            return Err(LabError::Model(format!("invalid noise spec on ({i},{a},{j})")));
        }
        if self.terminal[i] {
            return Err(LabError::Model(format!("terminal state {i} cannot carry reward noise")));
        }
        let k = self.idx(i, a, j);
        self.noise[k] = Some(spec);
        Ok(())
    }

    /// Removes every noise channel, leaving the deterministic reward table.
    pub fn strip_noise(mut self) -> Self {
        self.noise.iter_mut().for_each(|n| *n = None);
        self
    }

    /// Clips Gaussian draws at `±sigmas` standard deviations.
    pub fn set_noise_clip(&mut self, sigmas: Option<T>) {
        self.noise_clip = sigmas;
    }

    pub fn noise_clip(&self) -> Option<T> {
        self.noise_clip
    }

    /// Almost-sure bound on realized rewards, `None` when unclipped noise
    /// makes rewards unbounded.
    pub fn reward_bound(&self) -> Option<T> {
        let mut bound = T::zero();
        for (k, &c) in self.expected_reward.iter().enumerate() {
            let r = match self.noise[k] {
                Some(n) if n.std > T::zero() => (c + n.mean).abs() + self.noise_clip? * n.std,
                Some(n) => (c + n.mean).abs(),
                None => c.abs(),
            };
            bound = bound.max(r);
        }
        Some(bound)
    }

    /// Mean reward `Σ_j p(j|i,a)·(c(i,a,j) + noise mean)`.
    pub fn mean_reward(&self, i: usize, a: usize) -> T {
        let base = self.idx(i, a, 0);
        (0..self.num_states)
            .map(|j| {
                let mean = self.noise[base + j].map_or(T::zero(), |n| n.mean);
                self.transition[base + j] * (self.expected_reward[base + j] + mean)
            })
            .sum()
    }

    /// Smallest self-transition probability `min_{i,a} p(i|i,a)`.
    pub fn min_self_loop(&self) -> T {
        let mut m = T::one();
        for i in 0..self.num_states {
            for a in 0..self.num_actions {
                m = m.min(self.p(i, a, i));
            }
        }
        m
    }

    pub(crate) fn check_indices(&self, i: usize, a: usize) -> Result<()> {
        if i >= self.num_states {
            return Err(LabError::Index(format!("state {i} >= {}", self.num_states)));
        }
        if a >= self.num_actions {
            return Err(LabError::Index(format!("action {a} >= {}", self.num_actions)));
        }
        Ok(())
    }

    pub fn to_document(&self) -> MdpDocument {
        let (s, na) = (self.num_states, self.num_actions);
        let nested = |flat: &[T]| -> Vec<Vec<Vec<f64>>> {
            (0..s)
                .map(|i| {
                    (0..na)
                        .map(|a| {
                            let start = (i * na + a) * s;
                            flat[start..start + s].iter().map(|x| x.as_f64()).collect()
                        })
                        .collect()
                })
                .collect()
        };
        let mut noise = Vec::new();
        for i in 0..s {
            for a in 0..na {
                for j in 0..s {
                    if let Some(n) = self.noise(i, a, j) {
                        noise.push(NoiseEntry { i, a, j, mean: n.mean.as_f64(), std: n.std.as_f64() });
                    }
                }
            }
        }
        MdpDocument {
            num_states: s,
            num_actions: na,
            discount: self.discount.as_f64(),
            transition: nested(&self.transition),
            expected_reward: nested(&self.expected_reward),
            noise,
            terminal: self.terminal.clone(),
        }
    }

    pub fn from_document(doc: &MdpDocument) -> Result<Self> {
        let (s, na) = (doc.num_states, doc.num_actions);
        let flatten = |name: &str, nested: &[Vec<Vec<f64>>]| -> Result<Vec<T>> {
            let shape_ok = nested.len() == s
                && nested.iter().all(|r| r.len() == na && r.iter().all(|row| row.len() == s));
            if !shape_ok {
                return Err(LabError::Model(format!("`{name}` must have shape [{s}][{na}][{s}]")));
            }
            Ok(nested.iter().flatten().flatten().map(|&x| T::of(x)).collect())
        };
        let mut mdp = TabularMdp::new(
            s,
            na,
            flatten("transition", &doc.transition)?,
            flatten("expected_reward", &doc.expected_reward)?,
            T::of(doc.discount),
            doc.terminal.clone(),
        )?;
        for n in &doc.noise {
            mdp.set_noise(n.i, n.a, n.j, NoiseSpec { mean: T::of(n.mean), std: T::of(n.std) })?;
        }
        Ok(mdp)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MdpDocument = serde_json::from_str(text)?;
        Self::from_document(&doc)
    }
}

/// JSON form of a [`TabularMdp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub num_states: usize,
    pub num_actions: usize,
    pub discount: f64,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub expected_reward: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub noise: Vec<NoiseEntry>,
    pub terminal: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseEntry {
    pub i: usize,
    pub a: usize,
    pub j: usize,
    pub mean: f64,
    pub std: f64,
}
