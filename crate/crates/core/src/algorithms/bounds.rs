//! Sup-norm bounds on TSQL / S-TSQL iterates.
//!
//! Both bounds share the shape `prefactor · (1 + β|θ₀|) · Π_{n≥1}(1 + αₙ|θₙ|β²)`.
//! The infinite product is evaluated in log space as a truncated partial
//! product times `exp(tail)`, where `tail` is an analytic upper bound on
//! `Σ_{m≥n} αₘ|θₘ|β²`. Because `Π(1 + x) ≤ exp(Σ x)`, the returned value
//! is always an upper bound on the exact product.

use crate::algorithms::schedule::{validate_theta_schedule, Schedule, Verdict};
use crate::error::{param_err, Result};
use crate::Scalar;

/// Hard cap on explicitly multiplied factors; the analytic tail covers the rest.
pub const MAX_PRODUCT_TERMS: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBreakdown {
    /// `C/(1−β)` (plus the log-sum-exp slack for S-TSQL).
    pub prefactor: f64,
    /// `1 + β|θ₀|`
    pub head: f64,
    /// Log of the (upper-bounded) infinite product.
    pub log_product: f64,
    /// Number of factors multiplied explicitly.
    pub terms: u64,
    /// Analytic tail added to `log_product` at truncation.
    pub tail: f64,
}

impl BoundBreakdown {
    /// `prefactor · head · exp(log_product)`; `+∞` if it overflows `f64`.
    pub fn value(&self) -> f64 {
        (self.prefactor.ln() + self.head.ln() + self.log_product).exp()
    }
}

/// Upper bound on `Σ_{m≥n} αₘ|θₘ|β²` for `n ≥ 1`, using
/// `αₘ|θₘ| ≤ Cα·Cθ·m^(-e)` and `Σ_{m≥n} m^(-e) ≤ n^(-e) + n^(1−e)/(e−1)`.
fn tail_bound(alpha: &Schedule, theta: &Schedule, beta2: f64, n: u64) -> f64 {
    let e = alpha.decay_exponent() + theta.decay_exponent();
    let c = alpha.tail_coefficient() * theta.tail_coefficient() * beta2;
    let x = n as f64;
    c * (x.powf(-e) + x.powf(1.0 - e) / (e - 1.0))
}

/// Evaluates the bound with an arbitrary prefactor.
pub fn bound_breakdown(
    prefactor: f64,
    beta: f64,
    alpha: &Schedule,
    theta: &Schedule,
    tail_tol: f64,
) -> Result<BoundBreakdown> {
    if !(0.0..1.0).contains(&beta) {
        return param_err(format!("discount must lie in [0, 1), got {beta}"));
    }
    if !(tail_tol > 0.0) {
        return param_err(format!("tail tolerance must be positive, got {tail_tol}"));
    }
    if validate_theta_schedule(theta, alpha).alpha_theta_summable != Verdict::Yes {
        return param_err("sum of alpha_n*|theta_n| is not finite; the iterate bound does not exist");
    }
    let head = 1.0 + beta * theta.eval(0).abs();
    let beta2 = beta * beta;
    if alpha.is_identically_zero() || theta.is_identically_zero() {
        return Ok(BoundBreakdown { prefactor, head, log_product: 0.0, terms: 0, tail: 0.0 });
    }

    let mut log_product = 0.0_f64;
    let mut n = 1_u64;
    let tail = loop {
        let tail = tail_bound(alpha, theta, beta2, n);
        let x = alpha.eval(n).abs() * theta.eval(n).abs() * beta2;
        // stop once the next factor moves the partial product by less than
        // tail_tol, or once the whole remaining tail is below tail_tol
        if x * log_product.exp() < tail_tol || tail <= tail_tol || n > MAX_PRODUCT_TERMS {
            break tail;
        }
        log_product += x.ln_1p();
        n += 1;
    };
    Ok(BoundBreakdown { prefactor, head, log_product: log_product + tail, terms: n - 1, tail })
}

fn check_common<T: Scalar>(c_max: T, beta: T) -> Result<(f64, f64)> {
    let (c, b) = (c_max.as_f64(), beta.as_f64());
    if !(c >= 0.0) || !c.is_finite() {
        return param_err(format!("reward bound must be finite and non-negative, got {c}"));
    }
    if !(0.0..1.0).contains(&b) {
        return param_err(format!("discount must lie in [0, 1), got {b}"));
    }
    Ok((c, b))
}

/// Bound `M` on `‖Qₙ‖∞` for TSQL started from `‖Q₀‖∞ ≤ C/(1−β)`.
pub fn bound_tsql<T: Scalar>(c_max: T, beta: T, alpha: &Schedule, theta: &Schedule, tail_tol: T) -> Result<T> {
    let (c, b) = check_common(c_max, beta)?;
    let bd = bound_breakdown(c / (1.0 - b), b, alpha, theta, tail_tol.as_f64())?;
    Ok(T::of(bd.value()))
}

/// Bound `D` on `‖Qₙ‖∞` for S-TSQL: the TSQL bound with prefactor
/// `C/(1−β) + ln|A|/(N(1−β))`.
#[allow(clippy::too_many_arguments)]
pub fn bound_stsql<T: Scalar>(
    c_max: T,
    beta: T,
    alpha: &Schedule,
    theta: &Schedule,
    n: T,
    num_actions: usize,
    tail_tol: T,
) -> Result<T> {
    let (c, b) = check_common(c_max, beta)?;
    let n = n.as_f64();
    if !(n > 0.0) {
        return param_err(format!("temperature must be positive, got {n}"));
    }
    if num_actions == 0 {
        return param_err("need at least one action");
    }
    let prefactor = c / (1.0 - b) + (num_actions as f64).ln() / (n * (1.0 - b));
    let bd = bound_breakdown(prefactor, b, alpha, theta, tail_tol.as_f64())?;
    Ok(T::of(bd.value()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha_fig1() -> Schedule {
        Schedule::power_law(1.0, 1.0, 1.0).unwrap()
    }

    fn theta_fig1() -> Schedule {
        Schedule::rational(1.0, 10.0, 2.0).unwrap()
    }

    #[test]
    fn zero_theta_gives_geometric_bound() {
        let zero = Schedule::constant(0.0).unwrap();
        let m: f64 = bound_tsql(1.5, 0.25, &alpha_fig1(), &zero, 1e-9).unwrap();
        assert!((m - 2.0).abs() < 1e-14);
    }

    #[test]
    fn head_factor() {
        // the head only depends on θ₀
        let theta = Schedule::rational(0.8, 1.0, 2.0).unwrap();
        let bd = bound_breakdown(2.0, 0.5, &alpha_fig1(), &theta, 1e-9).unwrap();
        assert!((bd.head - (1.0 + 0.5 * 0.8)).abs() < 1e-15);
        assert_eq!(bd.prefactor, 2.0);
    }

    #[test]
    fn truncated_product_bounds_long_partial_product() {
        let (alpha, theta) = (alpha_fig1(), theta_fig1());
        let beta = 0.9;
        let bd = bound_breakdown(1.0, beta, &alpha, &theta, 1e-12).unwrap();
        // direct partial product to 10^6 terms never exceeds the bound
        let direct: f64 = (1..1_000_000u64)
            .map(|n| (alpha.eval(n) * theta.eval(n).abs() * beta * beta).ln_1p())
            .sum();
        assert!(direct <= bd.log_product + 1e-12);
        assert!(bd.log_product - direct < 1e-6, "bound is loose: {} vs {direct}", bd.log_product);
    }

    #[test]
    fn partial_products_non_decreasing() {
        let (alpha, theta) = (alpha_fig1(), theta_fig1());
        let mut log_p = 0.0;
        for n in 1..1000u64 {
            let next = log_p + (alpha.eval(n) * theta.eval(n).abs() * 0.81).ln_1p();
            assert!(next >= log_p);
            log_p = next;
        }
    }

    #[test]
    fn non_summable_rejected() {
        let err = bound_tsql(1.0, 0.5, &alpha_fig1(), &Schedule::constant(0.5).unwrap(), 1e-9);
        assert!(err.is_err());
    }

    #[test]
    fn stsql_closed_form() {
        let zero = Schedule::constant(0.0).unwrap();
        let d: f64 = bound_stsql(1.0, 0.6, &alpha_fig1(), &zero, 10000.0, 5, 1e-9).unwrap();
        assert!((d - (2.5 + 5f64.ln() / 4000.0)).abs() < 1e-12);
        assert!((d - 2.5004).abs() < 1e-4);
        let single: f64 = bound_stsql(1.0, 0.6, &alpha_fig1(), &zero, 3.0, 1, 1e-9).unwrap();
        assert!((single - 2.5).abs() < 1e-14);
    }

    #[test]
    fn stsql_approaches_tsql_as_temperature_grows() {
        let m: f64 = bound_tsql(1.0, 0.9, &alpha_fig1(), &theta_fig1(), 1e-9).unwrap();
        let d = bound_stsql(1.0, 0.9, &alpha_fig1(), &theta_fig1(), 1e12, 5, 1e-9).unwrap();
        assert!(d >= m);
        assert!((d - m) / m < 1e-9);
    }

    #[test]
    fn huge_products_saturate_to_infinity_not_nan() {
        let alpha = Schedule::power_law(100.0, 100.0, 1.0).unwrap();
        let theta = Schedule::sqrt_rational(-1000.0, 1000.0).unwrap();
        let m: f64 = bound_tsql(1.0, 0.99, &alpha, &theta, 1e-9).unwrap();
        assert!(!m.is_nan());
        assert!(m > 1e100);
    }
}
