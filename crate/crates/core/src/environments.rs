//! Benchmark MDP builders.

use rand::Rng;

use crate::error::{param_err, Result};
use crate::mdp::{NoiseSpec, TabularMdp};
use crate::Scalar;

/// Action indices in the maximization-bias MDP.
pub mod bias {
    pub const RIGHT: usize = 0;
    pub const LEFT: usize = 1;
    pub const START: usize = 0;
    pub const TERMINAL: usize = 9;
}

/// Action indices in the roulette MDP.
pub mod roulette {
    pub const WALK_AWAY: usize = 0;
    pub const NUM_ACTIONS: usize = 39;
    pub const TABLE: usize = 0;
    pub const TERMINAL: usize = 1;
    pub const GAMBLE_MEAN: f64 = -0.0526;
    pub const DISCOUNT: f64 = 0.99;
}

/// Episodic maximization-bias MDP: states 0–8 plus terminal 9.
///
/// From 0, RIGHT ends the episode with reward 0 and LEFT moves uniformly to
/// one of 1–8 with reward 0. From 1–8, RIGHT returns to 0 and LEFT ends the
/// episode; both pay `N(−0.1, 1)`.
pub fn build_bias_mdp<T: Scalar>(discount: T) -> Result<TabularMdp<T>> {
    use bias::*;
    let (s, na) = (10, 2);
    let idx = |i: usize, a: usize, j: usize| (i * na + a) * s + j;
    let mut p = vec![T::zero(); s * na * s];
    let mut c = vec![T::zero(); s * na * s];
    let eighth = T::of(0.125);
    p[idx(START, RIGHT, TERMINAL)] = T::one();
    for j in 1..=8 {
        p[idx(START, LEFT, j)] = eighth;
    }
    for i in 1..=8 {
        p[idx(i, RIGHT, START)] = T::one();
        c[idx(i, RIGHT, START)] = T::of(-0.1);
        p[idx(i, LEFT, TERMINAL)] = T::one();
        c[idx(i, LEFT, TERMINAL)] = T::of(-0.1);
    }
    p[idx(TERMINAL, RIGHT, TERMINAL)] = T::one();
    p[idx(TERMINAL, LEFT, TERMINAL)] = T::one();
    let mut terminal = vec![false; s];
    terminal[TERMINAL] = true;
    let mut mdp = TabularMdp::new(s, na, p, c, discount, terminal)?;
    let unit = NoiseSpec { mean: T::zero(), std: T::one() };
    for i in 1..=8 {
        mdp.set_noise(i, RIGHT, START, unit)?;
        mdp.set_noise(i, LEFT, TERMINAL, unit)?;
    }
    Ok(mdp)
}

/// Roulette as a single-state bandit with 39 actions and `β = 0.99`.
pub fn build_roulette_mdp<T: Scalar>() -> Result<TabularMdp<T>> {
    build_roulette_mdp_with(T::of(roulette::GAMBLE_MEAN), T::one())
}

/// Roulette with a custom gamble payoff distribution `N(mean, std²)`.
///
/// Action 0 walks away to the terminal state with reward 0; actions 1–38
/// gamble and stay at the table.
pub fn build_roulette_mdp_with<T: Scalar>(mean: T, std: T) -> Result<TabularMdp<T>> {
    use roulette::*;
    let (s, na) = (2, NUM_ACTIONS);
    let idx = |i: usize, a: usize, j: usize| (i * na + a) * s + j;
    let mut p = vec![T::zero(); s * na * s];
    let mut c = vec![T::zero(); s * na * s];
    p[idx(TABLE, WALK_AWAY, TERMINAL)] = T::one();
    for a in 1..na {
        p[idx(TABLE, a, TABLE)] = T::one();
        c[idx(TABLE, a, TABLE)] = mean;
    }
    for a in 0..na {
        p[idx(TERMINAL, a, TERMINAL)] = T::one();
    }
    let mut mdp = TabularMdp::new(s, na, p, c, T::of(DISCOUNT), vec![false, true])?;
    if std > T::zero() {
        for a in 1..na {
            mdp.set_noise(TABLE, a, TABLE, NoiseSpec { mean: T::zero(), std })?;
        }
    }
    Ok(mdp)
}

/// Parameters for [`generate_random_mdp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMdpParams {
    pub num_states: usize,
    pub num_actions: usize,
    pub discount: f64,
    /// Guaranteed minimum self-transition probability; 0 disables blending.
    pub self_loop_floor: f64,
    /// Draw rewards per `(i,a,j)`; when false one reward per `(i,a)` is
    /// shared across landing states.
    pub reward_per_transition: bool,
}

impl Default for RandomMdpParams {
    fn default() -> Self {
        RandomMdpParams {
            num_states: 10,
            num_actions: 5,
            discount: 0.6,
            self_loop_floor: 0.0,
            reward_per_transition: true,
        }
    }
}

/// Random dense MDP: rows are normalized `U(0,1)` weights, rewards are
/// `U(−1, 1)`. With a positive floor each row is blended toward its
/// self-loop, `p ← (1−f)p + f·δᵢ`.
pub fn generate_random_mdp<T: Scalar, R: Rng + ?Sized>(params: &RandomMdpParams, rng: &mut R) -> Result<TabularMdp<T>> {
    let RandomMdpParams { num_states: s, num_actions: na, discount, self_loop_floor: floor, reward_per_transition } =
        *params;
    if !(0.0..1.0).contains(&floor) {
        return param_err(format!("self-loop floor must lie in [0, 1), got {floor}"));
    }
    if s == 0 || na == 0 {
        return param_err("random MDP needs at least one state and one action");
    }
    let mut p = Vec::with_capacity(s * na * s);
    let mut c = Vec::with_capacity(s * na * s);
    for i in 0..s {
        for _a in 0..na {
            let weights: Vec<f64> = (0..s).map(|_| rng.random::<f64>() + f64::MIN_POSITIVE).collect();
            let total: f64 = weights.iter().sum();
            let mut row: Vec<f64> = weights.iter().map(|w| w / total).collect();
            if floor > 0.0 {
                row.iter_mut().for_each(|x| *x *= 1.0 - floor);
                row[i] += floor;
            }
            p.extend(row.into_iter().map(T::of));
            if reward_per_transition {
                c.extend((0..s).map(|_| T::of(rng.random_range(-1.0..1.0))));
            } else {
                let r = T::of(rng.random_range(-1.0..1.0));
                c.extend(std::iter::repeat_n(r, s));
            }
        }
    }
    TabularMdp::new(s, na, p, c, T::of(discount), vec![false; s])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{sample_transition, value_iteration, Backup};
    use crate::rng::seeded;

    #[test]
    fn bias_left_row_is_uniform() {
        let mdp = build_bias_mdp(0.95_f64).unwrap();
        for j in 1..=8 {
            assert_eq!(mdp.p(0, bias::LEFT, j), 0.125);
        }
        assert_eq!(mdp.num_states(), 10);
        assert!(mdp.is_terminal(bias::TERMINAL));
    }

    #[test]
    fn bias_rewards_have_mean_minus_tenth() {
        let mdp = build_bias_mdp(0.95_f64).unwrap();
        for s in 1..=8 {
            for a in [bias::LEFT, bias::RIGHT] {
                assert!((mdp.mean_reward(s, a) + 0.1).abs() < 1e-15);
            }
        }
        let mut rng = seeded(2024);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_transition(&mdp, 1, bias::LEFT, &mut rng).unwrap().1).sum::<f64>() / n as f64;
        assert!((mean + 0.1).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn bias_optimal_action_is_right() {
        let mdp = build_bias_mdp(0.95_f64).unwrap().strip_noise();
        let (q, v) = value_iteration(&mdp, Backup::Max, 1e-12, 100_000).unwrap();
        assert_eq!(q.get(0, bias::RIGHT), 0.0);
        assert!(q.get(0, bias::LEFT) < 0.0);
        assert_eq!(v.values[0], 0.0);
    }

    #[test]
    fn roulette_shape_and_optimum() {
        let mdp = build_roulette_mdp::<f64>().unwrap();
        assert_eq!(mdp.num_actions(), 39);
        assert_eq!(mdp.discount(), 0.99);
        let (q, v) = value_iteration(&mdp.strip_noise(), Backup::Max, 1e-12, 100_000).unwrap();
        assert_eq!(q.get(0, roulette::WALK_AWAY), 0.0);
        for a in 1..39 {
            assert!((q.get(0, a) - (-0.0526)).abs() < 1e-12);
        }
        assert_eq!(v.values[0], 0.0);
    }

    #[test]
    fn random_rows_normalized_and_floored() {
        let mut rng = seeded(5);
        let params = RandomMdpParams { self_loop_floor: 0.1, ..Default::default() };
        let mdp = generate_random_mdp::<f64, _>(&params, &mut rng).unwrap();
        for i in 0..10 {
            for a in 0..5 {
                let sum: f64 = mdp.transition_row(i, a).iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
        assert!(mdp.min_self_loop() >= 0.1);
        assert!(mdp.c_max() <= 1.0);
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let params = RandomMdpParams::default();
        let a = generate_random_mdp::<f64, _>(&params, &mut seeded(77)).unwrap();
        let b = generate_random_mdp::<f64, _>(&params, &mut seeded(77)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_state_action_rewards() {
        let params = RandomMdpParams { reward_per_transition: false, ..Default::default() };
        let mdp = generate_random_mdp::<f64, _>(&params, &mut seeded(1)).unwrap();
        let row = mdp.reward_row(3, 2);
        assert!(row.iter().all(|&c| c == row[0]));
    }

    #[test]
    fn floor_of_one_rejected() {
        let params = RandomMdpParams { self_loop_floor: 1.0, ..Default::default() };
        assert!(generate_random_mdp::<f64, _>(&params, &mut seeded(1)).is_err());
    }
}
