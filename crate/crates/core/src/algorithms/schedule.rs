use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::Scalar;

/// Closed-form schedule families. All are monotone in `|value|` for
/// `n ≥ 0` and decay like `n^(-exponent)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `a / (n + b)^p`
    PowerLaw,
    /// `a / (n^q + b)`
    Rational,
    /// `a / (√n + b)`
    SqrtRational,
    /// `a`
    Constant,
}

/// Parametric sequence used for step sizes `αₙ` and second-step weights `θₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    family: Family,
    a: f64,
    b: f64,
    exponent: f64,
    sign: f64,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    family: Family,
    a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sign: Option<f64>,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = LabError;

    fn try_from(r: ScheduleRepr) -> Result<Self> {
        let b = r.b.unwrap_or(0.0);
        let missing = |name: &str| LabError::Config(format!("schedule family {:?} needs `{name}`", r.family));
        let s = match r.family {
            Family::PowerLaw => Schedule::power_law(r.a, b, r.p.ok_or_else(|| missing("p"))?),
            Family::Rational => Schedule::rational(r.a, b, r.q.ok_or_else(|| missing("q"))?),
            Family::SqrtRational => Schedule::sqrt_rational(r.a, b),
            Family::Constant => Schedule::constant(r.a),
        }?;
        match r.sign {
            None => Ok(s),
            Some(sign) => s.with_sign(sign),
        }
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        let (b, p, q) = match s.family {
            Family::PowerLaw => (Some(s.b), Some(s.exponent), None),
            Family::Rational => (Some(s.b), None, Some(s.exponent)),
            Family::SqrtRational => (Some(s.b), None, None),
            Family::Constant => (None, None, None),
        };
        ScheduleRepr {
            family: s.family,
            a: s.a,
            b,
            p,
            q,
            sign: (s.sign < 0.0).then_some(-1.0),
        }
    }
}

fn bad(msg: String) -> LabError {
    LabError::Config(msg)
}

impl Schedule {
    fn build(family: Family, a: f64, b: f64, exponent: f64) -> Result<Self> {
        if !a.is_finite() {
            return Err(bad(format!("schedule coefficient a must be finite, got {a}")));
        }
        if family != Family::Constant {
            // b > 0 keeps the n = 0 term finite
            if !(b > 0.0 && b.is_finite()) {
                return Err(bad(format!("schedule offset b must be positive and finite, got {b}")));
            }
            if !(exponent > 0.0 && exponent.is_finite()) {
                return Err(bad(format!("schedule exponent must be positive and finite, got {exponent}")));
            }
        }
        Ok(Schedule { family, a, b, exponent, sign: 1.0 })
    }

    pub fn power_law(a: f64, b: f64, p: f64) -> Result<Self> {
        Self::build(Family::PowerLaw, a, b, p)
    }

    pub fn rational(a: f64, b: f64, q: f64) -> Result<Self> {
        Self::build(Family::Rational, a, b, q)
    }

    pub fn sqrt_rational(a: f64, b: f64) -> Result<Self> {
        Self::build(Family::SqrtRational, a, b, 0.5)
    }

    pub fn constant(a: f64) -> Result<Self> {
        Self::build(Family::Constant, a, 0.0, 0.0)
    }

    pub fn with_sign(mut self, sign: f64) -> Result<Self> {
        if sign != 1.0 && sign != -1.0 {
            return Err(bad(format!("schedule sign must be +1 or -1, got {sign}")));
        }
        self.sign = sign;
        Ok(self)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Value at step `n`.
    pub fn eval(&self, n: u64) -> f64 {
        let x = n as f64;
        let base = match self.family {
            Family::PowerLaw => self.a / (x + self.b).powf(self.exponent),
            Family::Rational => self.a / (x.powf(self.exponent) + self.b),
            Family::SqrtRational => self.a / (x.sqrt() + self.b),
            Family::Constant => self.a,
        };
        self.sign * base
    }

    pub fn at<T: Scalar>(&self, n: u64) -> T {
        T::of(self.eval(n))
    }

    /// Asymptotic decay rate `e` with `|value(n)| ~ n^(-e)`.
    pub fn decay_exponent(&self) -> f64 {
        match self.family {
            Family::Constant => 0.0,
            _ => self.exponent,
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.a == 0.0
    }

    /// `sup_n |value(n)|`, attained at `n = 0` for every family.
    pub fn sup_abs(&self) -> f64 {
        self.eval(0).abs()
    }

    /// Constant `C` with `|value(n)| ≤ C·n^(-e)` for all `n ≥ 1`.
    pub fn tail_coefficient(&self) -> f64 {
        self.a.abs()
    }

    /// Checks the step-size range `0 ≤ αₙ ≤ 1` for all `n ≥ 0`.
    pub fn validate_step_size(&self) -> Result<()> {
        let v0 = self.eval(0);
        if self.sign * self.a < 0.0 || v0 > 1.0 {
            return Err(bad(format!("step-size schedule must stay in [0, 1]; value at n=0 is {v0}")));
        }
        Ok(())
    }
}

/// Three-valued answer for conditions decided by exponent arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    /// No closed-form classification for the family combination.
    Undetermined,
}

impl Verdict {
    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

/// Classification of a θ schedule (paired with its step sizes) against the
/// requirements of the two-step boundedness and convergence results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaValidity {
    /// `|θₙ| ≤ 1` for all n.
    pub bounded_by_one: bool,
    /// `|θₙ|` non-increasing with limit zero.
    pub monotone_decreasing_abs: bool,
    /// `Σ αₙ|θₙ| < ∞`.
    pub alpha_theta_summable: Verdict,
    /// `Σ αₙ = ∞`.
    pub alpha_sum_diverges: Verdict,
    /// `Σ αₙ² < ∞`.
    pub alpha_squared_summable: Verdict,
}

impl ThetaValidity {
    /// Conditions on θ alone: bounded, decaying, and summable against α.
    pub fn theta_conditions_hold(&self) -> bool {
        self.bounded_by_one && self.monotone_decreasing_abs && self.alpha_theta_summable == Verdict::Yes
    }

    /// Robbins–Monro conditions on α.
    pub fn step_size_conditions_hold(&self) -> bool {
        self.alpha_sum_diverges == Verdict::Yes && self.alpha_squared_summable == Verdict::Yes
    }
}

/// Classifies `theta` (with step sizes `alpha`) analytically from the
/// family parameters: a product of two power decays `n^(-e₁)·n^(-e₂)` is
/// summable iff `e₁ + e₂ > 1`.
pub fn validate_theta_schedule(theta: &Schedule, alpha: &Schedule) -> ThetaValidity {
    let theta_zero = theta.is_identically_zero();
    let alpha_zero = alpha.is_identically_zero();
    let (e_alpha, e_theta) = (alpha.decay_exponent(), theta.decay_exponent());
    let decided = |ok: Option<bool>| ok.map_or(Verdict::Undetermined, Verdict::from_bool);
    let finite = e_alpha.is_finite() && e_theta.is_finite();

    ThetaValidity {
        bounded_by_one: theta.sup_abs() <= 1.0,
        monotone_decreasing_abs: theta_zero || e_theta > 0.0,
        alpha_theta_summable: if theta_zero || alpha_zero {
            Verdict::Yes
        } else {
            decided(finite.then_some(e_alpha + e_theta > 1.0))
        },
        alpha_sum_diverges: if alpha_zero {
            Verdict::No
        } else {
            decided(finite.then_some(e_alpha <= 1.0))
        },
        alpha_squared_summable: if alpha_zero {
            Verdict::Yes
        } else {
            decided(finite.then_some(2.0 * e_alpha > 1.0))
        },
    }
}
