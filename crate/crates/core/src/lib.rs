//! Tabular reinforcement-learning laboratory built around two-step Q-learning.
//!
//! The crate is organised in four layers:
//!
//! * [`mdp`]: the finite MDP model, Q-tables, exact Bellman operators (hard
//!   max and log-sum-exp), value iteration and ε-greedy action selection.
//! * [`algorithms`]: the incremental update rules (QL, TSQL, S-TSQL,
//!   Double-Q, D-Q-Avg, SORQL), step-size / θ schedules and the
//!   boundedness-bound calculators.
//! * [`environments`]: the benchmark MDP builders.
//! * [`harness`]: seeded, parallel experiment runners and CSV output.
//!
//! All model and update code is generic over the scalar type through
//! [`Scalar`]; the `*64` / `*32` aliases below pin the common choices.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod environments;
pub mod error;
pub mod harness;
pub mod mdp;
pub mod rng;
mod scalar;

pub use error::{LabError, Result};
pub use scalar::Scalar;

pub use algorithms::{
    bound_stsql, bound_tsql, dq_avg_update, double_q_update, ql_update, sorql_update,
    stsql_update, tsql_update, validate_theta_schedule, DoubleQState, Estimator, Schedule,
    ThetaValidity, Verdict,
};
pub use environments::{build_bias_mdp, build_roulette_mdp, generate_random_mdp, RandomMdpParams};
pub use mdp::{
    apply_h, apply_u, epsilon_greedy_select, fixed_point_gap_bound, sample_transition,
    stable_logsumexp, value_iteration, Backup, NoiseSpec, QTable, TabularMdp, TwoStepSample,
    ValueFunction,
};

pub type TabularMdp64 = TabularMdp<f64>;
pub type QTable64 = QTable<f64>;
pub type ValueFunction64 = ValueFunction<f64>;
pub type TwoStepSample64 = TwoStepSample<f64>;
pub type DoubleQState64 = DoubleQState<f64>;

pub type TabularMdp32 = TabularMdp<f32>;
pub type QTable32 = QTable<f32>;
pub type ValueFunction32 = ValueFunction<f32>;
