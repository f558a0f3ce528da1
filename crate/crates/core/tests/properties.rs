use proptest::prelude::*;
use rand::Rng;
use tsql_lab::environments::{generate_random_mdp, RandomMdpParams};
use tsql_lab::mdp::Backup;
use tsql_lab::rng::seeded;
use tsql_lab::{
    apply_h, apply_u, ql_update, stable_logsumexp, tsql_update, value_iteration, QTable, QTable64, TabularMdp64,
    TwoStepSample,
};

fn mdp(seed: u64, states: usize, actions: usize, discount: f64) -> TabularMdp64 {
    let params = RandomMdpParams { num_states: states, num_actions: actions, discount, ..Default::default() };
    generate_random_mdp(&params, &mut seeded(seed)).unwrap()
}

fn table(seed: u64, s: usize, a: usize, scale: f64) -> QTable64 {
    let mut rng = seeded(seed);
    QTable::from_values(s, a, (0..s * a).map(|_| rng.random_range(-scale..scale)).collect()).unwrap()
}

proptest! {
    #[test]
    fn lse_lies_between_max_and_max_plus_log_a(
        v in prop::collection::vec(-1e3..1e3f64, 1..12),
        log_n in -2.0..6.0f64,
    ) {
        let n = 10f64.powf(log_n);
        let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let l = stable_logsumexp(&v, n).unwrap();
        let slack = 1e-12 * (1.0 + m.abs());
        prop_assert!(m <= l + slack);
        prop_assert!(l <= m + (v.len() as f64).ln() / n + slack);
    }

    #[test]
    fn lse_commutes_with_shifts(v in prop::collection::vec(-50.0..50.0f64, 1..8), c in -100.0..100.0f64) {
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let lhs = stable_logsumexp(&shifted, 3.0).unwrap();
        let rhs = stable_logsumexp(&v, 3.0).unwrap() + c;
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn operators_contract(seed in 0u64..1000, beta in 0.0..0.99f64, n in 0.5..1e4f64) {
        let m = mdp(seed, 6, 3, beta);
        let (q1, q2) = (table(seed + 1, 6, 3, 10.0), table(seed + 2, 6, 3, 10.0));
        let d = q1.sup_distance(&q2);
        let dh = apply_h(&m, &q1).unwrap().sup_distance(&apply_h(&m, &q2).unwrap());
        let du = apply_u(&m, &q1, n).unwrap().sup_distance(&apply_u(&m, &q2, n).unwrap());
        prop_assert!(dh <= beta * d + 1e-12);
        prop_assert!(du <= beta * d + 1e-12);
    }

    #[test]
    fn zero_theta_reduces_to_q_learning(
        seed in 0u64..10_000,
        alpha in 0.0..=1.0f64,
        beta in 0.0..0.99f64,
        r1 in -5.0..5.0f64,
        r2 in -5.0..5.0f64,
    ) {
        let q = table(seed, 4, 2, 3.0);
        let s = TwoStepSample { i: 1, a: 0, j: 2, r1, d: 1, k: 3, r2 };
        let (mut a, mut b) = (q.clone(), q);
        tsql_update(&mut a, &s, alpha, 0.0, beta).unwrap();
        ql_update(&mut b, 1, 0, 2, r1, alpha, beta).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }
}

#[test]
fn value_iteration_returns_fixed_points() {
    for seed in 0..5 {
        let m = mdp(seed, 8, 4, 0.8);
        let (qh, _) = value_iteration(&m, Backup::Max, 1e-13, 100_000).unwrap();
        assert!(apply_h(&m, &qh).unwrap().sup_distance(&qh) < 1e-12);
        let (qu, _) = value_iteration(&m, Backup::lse(5.0).unwrap(), 1e-13, 100_000).unwrap();
        assert!(apply_u(&m, &qu, 5.0).unwrap().sup_distance(&qu) < 1e-12);
    }
}

#[test]
fn single_precision_solve_tracks_double() {
    let m64 = mdp(4, 5, 3, 0.6);
    let m32 = tsql_lab::TabularMdp32::from_document(&m64.to_document()).unwrap();
    let (q64, _) = value_iteration(&m64, Backup::Max, 1e-12, 10_000).unwrap();
    let (q32, _) = value_iteration(&m32, Backup::Max, 1e-5_f32, 10_000).unwrap();
    let worst = q64
        .values()
        .iter()
        .zip(q32.values())
        .map(|(a, b)| (a - *b as f64).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn mdp_json_round_trip() {
    let m = mdp(9, 4, 2, 0.7);
    let back = TabularMdp64::from_json(&m.to_json().unwrap()).unwrap();
    assert_eq!(back.to_json().unwrap(), m.to_json().unwrap());
}
