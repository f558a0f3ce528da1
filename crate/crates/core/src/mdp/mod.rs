//! Finite MDP model, Q-tables, exact Bellman operators and sampling.

mod model;
mod operators;
mod policy;
mod qtable;
mod sample;

pub use model::{MdpDocument, NoiseEntry, NoiseSpec, TabularMdp};
pub use operators::{
    apply_backup, apply_h, apply_u, fixed_point_gap_bound, stable_logsumexp, value_iteration,
    Backup, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};
pub use policy::{argmax, epsilon_greedy_select};
pub use qtable::{QTable, ValueFunction};
pub use sample::{sample_transition, TwoStepSample};
