use std::borrow::Cow;

use rand::Rng;

use crate::algorithms::{
    dq_avg_update, double_q_update, ql_update, sorql_update, sorql_weight, two_step_update, DoubleQState, Schedule,
};
use crate::error::Result;
use crate::harness::{AlgorithmKind, AlgorithmSpec, BehaviorKind, ExperimentConfig, StepIndexMode};
use crate::mdp::{epsilon_greedy_select, sample_transition, Backup, QTable, TabularMdp, TwoStepSample};

/// Behaviour policy driving data collection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Behavior {
    /// ε-greedy on the learner's own decision table.
    EpsilonGreedy(f64),
    Uniform,
}

impl Behavior {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        match cfg.resolved_behavior() {
            BehaviorKind::EpsilonGreedy => Behavior::EpsilonGreedy(cfg.epsilon),
            BehaviorKind::Uniform => Behavior::Uniform,
        }
    }

    fn epsilon(self) -> f64 {
        match self {
            Behavior::EpsilonGreedy(e) => e,
            Behavior::Uniform => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerParams {
    pub alpha: Schedule,
    pub theta: Schedule,
    /// Log-sum-exp temperature (S-TSQL only).
    pub temperature: f64,
    /// SORQL weight; `None` uses the model-derived optimum.
    pub relaxation: Option<f64>,
    pub step_index_mode: StepIndexMode,
}

impl LearnerParams {
    pub fn from_config(spec: &AlgorithmSpec, cfg: &ExperimentConfig) -> Self {
        LearnerParams {
            alpha: spec.params.alpha.unwrap_or(cfg.alpha),
            theta: spec.params.theta.unwrap_or(cfg.theta),
            temperature: spec.params.temperature.unwrap_or(cfg.temperature),
            relaxation: spec.params.relaxation,
            step_index_mode: cfg.step_index_mode,
        }
    }
}

#[derive(Debug, Clone)]
enum Tables {
    Single(QTable<f64>),
    Double(DoubleQState<f64>),
}

/// One learning agent: its tables, schedules and update counter.
#[derive(Debug, Clone)]
pub struct Learner {
    kind: AlgorithmKind,
    tables: Tables,
    alpha: Schedule,
    theta: Schedule,
    backup: Backup<f64>,
    relaxation: f64,
    mode: StepIndexMode,
    steps: u64,
}

impl Learner {
    pub fn new(kind: AlgorithmKind, params: &LearnerParams, mdp: &TabularMdp<f64>) -> Result<Self> {
        params.alpha.validate_step_size()?;
        let tables = if kind.is_double() {
            Tables::Double(DoubleQState::for_mdp(mdp))
        } else {
            Tables::Single(QTable::for_mdp(mdp))
        };
        let backup = match kind {
            AlgorithmKind::Stsql => Backup::lse(params.temperature)?,
            _ => Backup::Max,
        };
        Ok(Learner {
            kind,
            tables,
            alpha: params.alpha,
            theta: params.theta,
            backup,
            relaxation: params.relaxation.unwrap_or_else(|| sorql_weight(mdp)),
            mode: params.step_index_mode,
            steps: 0,
        })
    }

    pub fn kind(&self) -> AlgorithmKind {
        self.kind
    }

    /// Number of updates performed so far (the global index `n`).
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn relaxation(&self) -> f64 {
        self.relaxation
    }

    /// Row used for action selection and greedy reads: the learner's own
    /// table, or the estimator average for two-estimator methods.
    pub fn decision_row(&self, i: usize) -> Cow<'_, [f64]> {
        match &self.tables {
            Tables::Single(q) => Cow::Borrowed(q.row(i)),
            Tables::Double(st) => Cow::Owned(st.average_row(i)),
        }
    }

    /// Table whose greedy values are reported.
    pub fn table(&self) -> Cow<'_, QTable<f64>> {
        match &self.tables {
            Tables::Single(q) => Cow::Borrowed(q),
            Tables::Double(st) => Cow::Owned(st.average_table()),
        }
    }

    /// `max_b` of the decision row at `i`.
    pub fn greedy_value(&self, i: usize) -> f64 {
        match &self.tables {
            Tables::Single(q) => q.max_row(i),
            Tables::Double(st) => st
                .qa
                .row(i)
                .iter()
                .zip(st.qb.row(i))
                .map(|(x, y)| (x + y) * 0.5)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Largest absolute entry across all estimators.
    pub fn sup_norm(&self) -> f64 {
        match &self.tables {
            Tables::Single(q) => q.sup_norm(),
            Tables::Double(st) => st.qa.sup_norm().max(st.qb.sup_norm()),
        }
    }

    fn pair_count(&self, i: usize, a: usize) -> u64 {
        match &self.tables {
            Tables::Single(q) => q.step_count(i, a),
            Tables::Double(st) => st.qa.step_count(i, a) + st.qb.step_count(i, a),
        }
    }

    fn step_index(&self, i: usize, a: usize) -> u64 {
        match self.mode {
            StepIndexMode::Global => self.steps,
            StepIndexMode::PerPair => self.pair_count(i, a),
        }
    }

    fn alpha_at(&self, i: usize, a: usize) -> f64 {
        self.alpha.eval(self.step_index(i, a))
    }

    pub fn act<R: Rng + ?Sized>(&self, i: usize, behavior: Behavior, rng: &mut R) -> Result<usize> {
        epsilon_greedy_select(&self.decision_row(i), behavior.epsilon(), rng)
    }

    /// Performs one update starting in state `s` and returns the state the
    /// next update starts from: `j` for one-step methods, `k` for two-step
    /// methods (the second transition is consumed, not updated).
    pub fn advance<R: Rng + ?Sized>(
        &mut self,
        mdp: &TabularMdp<f64>,
        s: usize,
        behavior: Behavior,
        rng: &mut R,
    ) -> Result<usize> {
        let a = self.act(s, behavior, rng)?;
        let (j, r1) = sample_transition(mdp, s, a, rng)?;
        let alpha = self.alpha_at(s, a);
        let beta = mdp.discount();

        let two_step = if self.kind.is_two_step() {
            Some(if mdp.is_terminal(j) {
                TwoStepSample::absorbed(s, a, j, r1)
            } else {
                let d = self.act(j, behavior, rng)?;
                let (k, r2) = sample_transition(mdp, j, d, rng)?;
                TwoStepSample { i: s, a, j, r1, d, k, r2 }
            })
        } else {
            None
        };
        let theta = self.theta.eval(self.step_index(s, a));

        let next = match (&mut self.tables, self.kind) {
            (Tables::Single(q), AlgorithmKind::Ql) => {
                ql_update(q, s, a, j, r1, alpha, beta)?;
                j
            }
            (Tables::Single(q), AlgorithmKind::Sorql) => {
                sorql_update(q, s, a, j, r1, alpha, beta, self.relaxation)?;
                j
            }
            (Tables::Single(q), AlgorithmKind::Tsql | AlgorithmKind::Stsql) => {
                let sample = two_step.expect("two-step sample drawn above");
                two_step_update(q, &sample, alpha, theta, beta, self.backup)?;
                sample.k
            }
            (Tables::Double(st), AlgorithmKind::DoubleQ) => {
                double_q_update(st, s, a, j, r1, alpha, beta, rng)?;
                j
            }
            (Tables::Double(st), AlgorithmKind::DqAvg) => {
                dq_avg_update(st, s, a, j, r1, alpha, beta, rng)?;
                j
            }
            _ => unreachable!("table layout is fixed by the algorithm kind"),
        };
        self.steps += 1;
        Ok(next)
    }
}
