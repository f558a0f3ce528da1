use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use crate::algorithms::{bound_breakdown, BoundBreakdown, Schedule};
use crate::environments::{
    bias, build_bias_mdp, build_roulette_mdp_with, generate_random_mdp, roulette, RandomMdpParams,
};
use crate::error::{param_err, LabError, Result};
use crate::harness::{
    AlgorithmKind, AlgorithmSpec, Behavior, Experiment, ExperimentConfig, Learner, LearnerParams, MetricSeries,
    RunRecord, StepIndexMode, SummaryRow,
};
use crate::mdp::{argmax, value_iteration, Backup, QTable, TabularMdp, ValueFunction, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::rng::{self, LabRng};
use crate::Scalar;

const STREAM_BIAS: u64 = 1;
const STREAM_MDP: u64 = 2;
const STREAM_MDP_RUN: u64 = 3;
const STREAM_ROULETTE: u64 = 4;

const BOUND_TAIL_TOL: f64 = 1e-9;

/// Mean over `k` of `‖J*ₖ − max_b Qₖ(·, b)‖∞`.
pub fn average_error<T: Scalar>(final_tables: &[QTable<T>], optima: &[ValueFunction<T>]) -> Result<T> {
    if final_tables.len() != optima.len() {
        return param_err(format!("{} tables but {} optimal value functions", final_tables.len(), optima.len()));
    }
    if final_tables.is_empty() {
        return param_err("average error over an empty set");
    }
    let mut total = T::zero();
    for (q, v) in final_tables.iter().zip(optima) {
        if q.num_states() != v.len() {
            return param_err(format!("table has {} states, value function {}", q.num_states(), v.len()));
        }
        total = total + q.greedy_values().sup_distance(v);
    }
    Ok(total / T::of(final_tables.len() as f64))
}

/// Dispatches on `cfg.experiment`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    match cfg.experiment {
        Experiment::Bias => run_bias_experiment(cfg),
        Experiment::RandomMdps => run_random_mdp_benchmark(cfg),
        Experiment::Roulette => run_roulette_experiment(cfg),
    }
}

fn expect_experiment(cfg: &ExperimentConfig, want: Experiment) -> Result<()> {
    if cfg.experiment != want {
        return Err(LabError::Config(format!("expected a {want:?} config, got {:?}", cfg.experiment)));
    }
    cfg.validate()
}

fn run_episode(
    learner: &mut Learner,
    mdp: &TabularMdp<f64>,
    start: usize,
    cap: Option<u64>,
    behavior: Behavior,
    rng: &mut LabRng,
) -> Result<()> {
    let mut s = start;
    let mut updates = 0;
    loop {
        s = learner.advance(mdp, s, behavior, rng)?;
        updates += 1;
        if mdp.is_terminal(s) || cap.is_some_and(|c| updates >= c) {
            return Ok(());
        }
    }
}

/// Runs every `(algorithm, run)` job in parallel; results come back in job order.
fn per_run<T: Send>(
    cfg: &ExperimentConfig,
    job: impl Fn(&AlgorithmSpec, usize) -> Result<T> + Sync,
) -> Result<Vec<Vec<T>>> {
    let jobs: Vec<(usize, usize)> = (0..cfg.algorithms.len())
        .flat_map(|ai| (0..cfg.independent_runs).map(move |r| (ai, r)))
        .collect();
    let flat: Vec<T> = jobs
        .par_iter()
        .map(|&(ai, r)| job(&cfg.algorithms[ai], r))
        .collect::<Result<Vec<_>>>()?;
    let mut grouped: Vec<Vec<T>> = (0..cfg.algorithms.len()).map(|_| Vec::new()).collect();
    for ((ai, _), out) in jobs.into_iter().zip(flat) {
        grouped[ai].push(out);
    }
    Ok(grouped)
}

fn curve_summary(cfg: &ExperimentConfig, metric: &str, curves: &[Vec<Vec<f64>>], steps: Vec<u64>) -> (Vec<MetricSeries>, Vec<SummaryRow>) {
    let mut series = Vec::new();
    let mut summary = Vec::new();
    for (spec, runs) in cfg.algorithms.iter().zip(curves) {
        let label = spec.label();
        let refs: Vec<&Vec<f64>> = runs.iter().collect();
        let s = MetricSeries::aggregate(metric, &label, steps.clone(), &refs);
        if let Some(last) = s.last() {
            summary.push(SummaryRow { algorithm: label.clone(), metric: format!("final_{metric}"), value: last });
            summary.push(SummaryRow { algorithm: label.clone(), metric: format!("mean_{metric}"), value: s.values.iter().sum::<f64>() / s.values.len() as f64 });
        }
        series.push(s);
    }
    (series, summary)
}

/// Maximization-bias experiment: probability of choosing LEFT at the start
/// state after every episode, averaged over independent runs.
pub fn run_bias_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::Bias)?;
    let started = Instant::now();
    let mut mdp = build_bias_mdp(cfg.resolved_discount())?;
    mdp.set_noise_clip(cfg.noise_clip_sigmas);
    let behavior = Behavior::from_config(cfg);
    let cap = cfg.resolved_episode_cap();
    let eps = cfg.epsilon;
    let explore_share = eps / mdp.num_actions() as f64;

    let curves = per_run(cfg, |spec, r| {
        let mut rng = rng::stream(cfg.seed, &[STREAM_BIAS, r as u64]);
        let mut learner = Learner::new(spec.name, &LearnerParams::from_config(spec, cfg), &mdp)?;
        let mut curve = Vec::with_capacity(cfg.episodes_or_iterations as usize);
        for _ in 0..cfg.episodes_or_iterations {
            run_episode(&mut learner, &mdp, bias::START, cap, behavior, &mut rng)?;
            let greedy_left = argmax(&learner.decision_row(bias::START)) == bias::LEFT;
            curve.push(explore_share + if greedy_left { 1.0 - eps } else { 0.0 });
        }
        Ok(curve)
    })?;

    let steps = (1..=cfg.episodes_or_iterations).collect();
    let (series, summary) = curve_summary(cfg, "left_probability", &curves, steps);
    Ok(RunRecord { config: cfg.clone(), seed: cfg.seed, series, summary, wall_clock_secs: started.elapsed().as_secs_f64() })
}

/// Roulette experiment: `max_a Q(0, a)` after every episode, averaged over
/// independent runs.
pub fn run_roulette_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::Roulette)?;
    let started = Instant::now();
    let mean = cfg.gamble_mean.unwrap_or(roulette::GAMBLE_MEAN);
    let std = cfg.gamble_std.unwrap_or(1.0);
    let mut mdp = build_roulette_mdp_with(mean, std)?.with_discount(cfg.resolved_discount())?;
    mdp.set_noise_clip(cfg.noise_clip_sigmas);
    let behavior = Behavior::from_config(cfg);
    let cap = cfg.resolved_episode_cap();

    let curves = per_run(cfg, |spec, r| {
        let mut rng = rng::stream(cfg.seed, &[STREAM_ROULETTE, r as u64]);
        let mut learner = Learner::new(spec.name, &LearnerParams::from_config(spec, cfg), &mdp)?;
        let mut curve = Vec::with_capacity(cfg.episodes_or_iterations as usize);
        for _ in 0..cfg.episodes_or_iterations {
            run_episode(&mut learner, &mdp, roulette::TABLE, cap, behavior, &mut rng)?;
            curve.push(learner.greedy_value(roulette::TABLE));
        }
        Ok(curve)
    })?;

    let steps = (1..=cfg.episodes_or_iterations).collect();
    let (series, summary) = curve_summary(cfg, "max_q", &curves, steps);
    Ok(RunRecord { config: cfg.clone(), seed: cfg.seed, series, summary, wall_clock_secs: started.elapsed().as_secs_f64() })
}

/// Iterate bound for `kind`, as a function of the model's reward bound.
/// The product over the schedules is shared by every model with the same
/// discount, so it is computed once per algorithm.
struct IterateBound {
    unit: BoundBreakdown,
    lse_term: f64,
}

impl IterateBound {
    fn for_algorithm(kind: AlgorithmKind, params: &LearnerParams, beta: f64, num_actions: usize) -> Option<Self> {
        if params.step_index_mode != StepIndexMode::Global {
            return None;
        }
        let zero = Schedule::constant(0.0).ok()?;
        let (theta, lse_term) = match kind {
            AlgorithmKind::Ql => (&zero, 0.0),
            AlgorithmKind::Tsql => (&params.theta, 0.0),
            AlgorithmKind::Stsql => {
                (&params.theta, (num_actions as f64).ln() / (params.temperature * (1.0 - beta)))
            }
            _ => return None,
        };
        let unit = bound_breakdown(1.0, beta, &params.alpha, theta, BOUND_TAIL_TOL).ok()?;
        Some(IterateBound { unit, lse_term })
    }

    fn value(&self, mdp: &TabularMdp<f64>) -> Option<f64> {
        let c = mdp.reward_bound()?;
        let prefactor = c / (1.0 - mdp.discount()) + self.lse_term;
        Some(BoundBreakdown { prefactor, ..self.unit }.value())
    }
}

struct BenchmarkRun {
    errors: Vec<f64>,
    final_table: QTable<f64>,
    max_sup_norm: f64,
    violations: Option<u64>,
}

/// Random-MDP benchmark: per-MDP sup-norm error of the greedy values
/// against the value-iteration optimum, averaged over MDPs (and runs).
pub fn run_random_mdp_benchmark(cfg: &ExperimentConfig) -> Result<RunRecord> {
    expect_experiment(cfg, Experiment::RandomMdps)?;
    let started = Instant::now();
    let params = RandomMdpParams {
        num_states: cfg.num_states.unwrap_or(10),
        num_actions: cfg.num_actions.unwrap_or(5),
        discount: cfg.resolved_discount(),
        self_loop_floor: cfg.self_loop_floor,
        reward_per_transition: cfg.reward_per_transition,
    };
    let problems: Vec<(TabularMdp<f64>, ValueFunction<f64>)> = (0..cfg.num_mdps)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(cfg.seed, &[STREAM_MDP, k as u64]);
            let mut mdp = generate_random_mdp(&params, &mut rng)?;
            mdp.set_noise_clip(cfg.noise_clip_sigmas);
            let (_, v) = value_iteration(&mdp, Backup::Max, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
            Ok((mdp, v))
        })
        .collect::<Result<_>>()?;

    let horizon = cfg.episodes_or_iterations;
    let every = cfg.record_every.unwrap_or(1);
    let steps: Vec<u64> = (1..=horizon).filter(|n| n % every == 0).collect();
    let behavior = Behavior::from_config(cfg);

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.algorithms.len())
        .flat_map(|ai| (0..cfg.num_mdps).flat_map(move |k| (0..cfg.independent_runs).map(move |r| (ai, k, r))))
        .collect();
    let bounds: Vec<Option<IterateBound>> = cfg
        .algorithms
        .iter()
        .map(|spec| {
            IterateBound::for_algorithm(spec.name, &LearnerParams::from_config(spec, cfg), params.discount, params.num_actions)
        })
        .collect();
    let results: Vec<BenchmarkRun> = jobs
        .par_iter()
        .map(|&(ai, k, r)| {
            let spec = &cfg.algorithms[ai];
            let (mdp, optimum) = &problems[k];
            let lp = LearnerParams::from_config(spec, cfg);
            let bound = bounds[ai].as_ref().and_then(|b| b.value(mdp));
            let mut rng = rng::stream(cfg.seed, &[STREAM_MDP_RUN, k as u64, r as u64]);
            let mut learner = Learner::new(spec.name, &lp, mdp)?;
            let mut s = rng.random_range(0..mdp.num_states());
            let mut errors = Vec::with_capacity(steps.len());
            let mut max_sup_norm = 0.0_f64;
            let mut violations = 0_u64;
            for n in 1..=horizon {
                s = learner.advance(mdp, s, behavior, &mut rng)?;
                let norm = learner.sup_norm();
                max_sup_norm = max_sup_norm.max(norm);
                if bound.is_some_and(|b| norm > b) {
                    violations += 1;
                }
                if n % every == 0 {
                    let err = (0..mdp.num_states())
                        .map(|i| (optimum.values[i] - learner.greedy_value(i)).abs())
                        .fold(0.0, f64::max);
                    errors.push(err);
                }
            }
            Ok(BenchmarkRun {
                errors,
                final_table: learner.table().into_owned(),
                max_sup_norm,
                violations: bound.map(|_| violations),
            })
        })
        .collect::<Result<_>>()?;

    let per_alg = cfg.num_mdps * cfg.independent_runs;
    let mut series = Vec::new();
    let mut summary = Vec::new();
    for (ai, spec) in cfg.algorithms.iter().enumerate() {
        let label = spec.label();
        let runs = &results[ai * per_alg..(ai + 1) * per_alg];
        let curves: Vec<&Vec<f64>> = runs.iter().map(|r| &r.errors).collect();
        series.push(MetricSeries::aggregate("error", &label, steps.clone(), &curves));

        let tables: Vec<QTable<f64>> = runs.iter().map(|r| r.final_table.clone()).collect();
        let optima: Vec<ValueFunction<f64>> = jobs[ai * per_alg..(ai + 1) * per_alg]
            .iter()
            .map(|&(_, k, _)| problems[k].1.clone())
            .collect();
        let row = |metric: &str, value: f64| SummaryRow { algorithm: label.clone(), metric: metric.into(), value };
        summary.push(row("average_error", average_error(&tables, &optima)?));
        summary.push(row("max_abs_q", runs.iter().map(|r| r.max_sup_norm).fold(0.0, f64::max)));
        if runs.iter().all(|r| r.violations.is_some()) {
            let total: u64 = runs.iter().filter_map(|r| r.violations).sum();
            summary.push(row("bound_violations", total as f64));
        }
    }
    Ok(RunRecord { config: cfg.clone(), seed: cfg.seed, series, summary, wall_clock_secs: started.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::AlgorithmSpec;

    fn alpha() -> Schedule {
        Schedule::power_law(1.0, 1.0, 1.0).unwrap()
    }

    fn theta() -> Schedule {
        Schedule::rational(1.0, 10.0, 2.0).unwrap()
    }

    #[test]
    fn average_error_cases() {
        let q = QTable::from_values(2, 1, vec![1.0, 2.5]).unwrap();
        let v = ValueFunction { values: vec![1.0, 2.0] };
        assert_eq!(average_error(std::slice::from_ref(&q), std::slice::from_ref(&v)).unwrap(), 0.5);
        let exact = QTable::from_values(2, 1, vec![1.0, 2.0]).unwrap();
        assert_eq!(average_error(&[exact], std::slice::from_ref(&v)).unwrap(), 0.0);
        let q2 = QTable::from_values(1, 1, vec![0.2]).unwrap();
        let q4 = QTable::from_values(1, 1, vec![-0.4]).unwrap();
        let zero = ValueFunction { values: vec![0.0] };
        let avg: f64 = average_error(&[q2, q4], &[zero.clone(), zero]).unwrap();
        assert!((avg - 0.3).abs() < 1e-15);
        assert!(average_error(&[q], &[]).is_err());
    }

    #[test]
    fn zero_episode_bias_run_is_empty() {
        let cfg = ExperimentConfig::new(Experiment::Bias, vec![AlgorithmSpec::new(AlgorithmKind::Ql)], alpha(), theta());
        let rec = run_bias_experiment(&cfg).unwrap();
        assert_eq!(rec.series.len(), 1);
        assert!(rec.series[0].values.is_empty());
    }

    #[test]
    fn bias_values_in_range() {
        let mut cfg = ExperimentConfig::new(
            Experiment::Bias,
            vec![AlgorithmSpec::new(AlgorithmKind::Ql), AlgorithmSpec::new(AlgorithmKind::DqAvg)],
            alpha(),
            theta(),
        );
        cfg.episodes_or_iterations = 30;
        cfg.independent_runs = 8;
        let rec = run_bias_experiment(&cfg).unwrap();
        for s in &rec.series {
            assert_eq!(s.values.len(), 30);
            assert!(s.values.iter().all(|&v| (0.05 - 1e-12..=0.95 + 1e-12).contains(&v)));
        }
    }

    #[test]
    fn wrong_experiment_is_config_error() {
        let cfg = ExperimentConfig::new(Experiment::Bias, vec![AlgorithmSpec::new(AlgorithmKind::Ql)], alpha(), theta());
        assert!(matches!(run_roulette_experiment(&cfg), Err(LabError::Config(_))));
    }

    #[test]
    fn degenerate_roulette_stays_at_zero() {
        let mut cfg = ExperimentConfig::new(
            Experiment::Roulette,
            [AlgorithmKind::Ql, AlgorithmKind::Tsql, AlgorithmKind::Stsql, AlgorithmKind::DoubleQ]
                .into_iter()
                .map(AlgorithmSpec::new)
                .collect(),
            Schedule::power_law(10.0, 100.0, 1.0).unwrap(),
            Schedule::power_law(1000.0, 1000.0, 1.0).unwrap().with_sign(-1.0).unwrap(),
        );
        cfg.gamble_mean = Some(0.0);
        cfg.gamble_std = Some(0.0);
        cfg.episodes_or_iterations = 200;
        cfg.independent_runs = 2;
        let rec = run_roulette_experiment(&cfg).unwrap();
        for s in &rec.series {
            if s.algorithm == "S-TSQL" {
                // log-sum-exp over an all-zero row is ln|A|/N, not 0
                assert!(s.values.iter().all(|v| v.abs() < 0.01), "{}", s.algorithm);
            } else {
                assert!(s.values.iter().all(|&v| v == 0.0), "{}", s.algorithm);
            }
        }
    }

    #[test]
    fn oracle_table_has_zero_error() {
        let mut rng = rng::seeded(3);
        let mdp: TabularMdp<f64> = generate_random_mdp(&RandomMdpParams::default(), &mut rng).unwrap();
        let (q, v) = value_iteration(&mdp, Backup::Max, 1e-12, 100_000).unwrap();
        assert!(average_error(&[q], &[v]).unwrap() < 1e-15);
    }
}
