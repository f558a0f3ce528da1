//! Incremental update rules, step-size / θ schedules and boundedness bounds.

mod bounds;
mod schedule;
mod updates;

pub use bounds::{bound_breakdown, bound_stsql, bound_tsql, BoundBreakdown, MAX_PRODUCT_TERMS};
pub use schedule::{validate_theta_schedule, Family, Schedule, ThetaValidity, Verdict};
pub use updates::{
    dq_avg_update, double_q_update, double_q_update_with, ql_update, sorql_update,
    sorql_weight, stsql_update, tsql_update, two_step_update, DoubleQState, Estimator,
};
