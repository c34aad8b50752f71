//! Univariate α-stable laws in the S1 parametrization.
//!
//! `W ~ S(α, β, τ, δ; 1)` has characteristic function
//!
//! ```text
//! α ≠ 1: exp{−τ^α |u|^α [1 − iβ tan(πα/2) sign u] + iδu}
//! α = 1: exp{−τ |u| [1 + iβ (2/π) sign u log|u|] + iδu}
//! ```
//!
//! Distribution functions come from closed forms where they exist (Cauchy,
//! Gaussian, Lévy) and otherwise from the integral representation in
//! [`integral`]. Quantiles are found by bracketed root finding on the log
//! tail mass; in the far tails the power-law approximation seeds the search.

mod closed;
mod integral;
mod table;

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{check_param, Error, Result};
use crate::roots;

use closed::ClosedForm;
pub(crate) use integral::Side;

pub use table::{logit, QuantileTable};

/// Tolerances and budgets for the numerical evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPolicy {
    /// Absolute error allowed in a distribution-function value.
    pub cdf_abs_tol: f64,
    /// Relative error, in probability, allowed in `cdf(quantile(p))`
    /// against `min(p, 1 - p)`.
    pub quantile_tol: f64,
    /// Tail mass below which quantile searches start from the inverted
    /// power-law tail.
    pub tail_switch: f64,
    /// Cap on bracket expansions and root-finding iterations.
    pub max_iter: usize,
    /// Use closed forms for the Cauchy, Gaussian and Lévy laws. Turning this
    /// off forces the generic numerical path.
    pub closed_forms: bool,
}

impl Default for EvalPolicy {
    fn default() -> Self {
        EvalPolicy {
            cdf_abs_tol: 1e-10,
            quantile_tol: 1e-8,
            tail_switch: 1e-4,
            max_iter: 200,
            closed_forms: true,
        }
    }
}

impl EvalPolicy {
    pub fn validate(&self) -> Result<()> {
        check_param(
            "cdf_abs_tol",
            self.cdf_abs_tol,
            self.cdf_abs_tol > 0.0,
            "must be positive",
        )?;
        check_param(
            "quantile_tol",
            self.quantile_tol,
            self.quantile_tol > 0.0,
            "must be positive",
        )?;
        check_param(
            "tail_switch",
            self.tail_switch,
            self.tail_switch > 0.0 && self.tail_switch < 0.5,
            "must lie in (0, 0.5)",
        )?;
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                name: "max_iter",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

/// Parameters `(α, β, τ, δ)` of an S1 stable law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
    beta: f64,
    tau: f64,
    delta: f64,
}

impl StableParams {
    pub fn new(alpha: f64, beta: f64, tau: f64, delta: f64) -> Result<Self> {
        check_param(
            "alpha",
            alpha,
            alpha > 0.0 && alpha <= 2.0,
            "must lie in (0, 2]",
        )?;
        check_param(
            "beta",
            beta,
            (-1.0..=1.0).contains(&beta),
            "must lie in [-1, 1]",
        )?;
        check_param("tau", tau, tau > 0.0, "must be positive")?;
        check_param("delta", delta, true, "must be finite")?;
        Ok(StableParams {
            alpha,
            beta,
            tau,
            delta,
        })
    }

    /// `S(α, β) = S(α, β, 1, 0; 1)`.
    pub fn standard(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn is_standard(&self) -> bool {
        self.tau == 1.0 && self.delta == 0.0
    }

    pub fn char_fn(&self, u: f64) -> Complex64 {
        if u == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let (a, b, t) = (self.alpha, self.beta, self.tau);
        let sign = u.signum();
        let exponent = if a != 1.0 {
            let scale = (t * u.abs()).powf(a);
            Complex64::new(-scale, scale * b * (FRAC_PI_2 * a).tan() * sign)
        } else {
            let scale = t * u.abs();
            Complex64::new(-scale, -scale * b * FRAC_2_PI * sign * u.abs().ln())
        };
        (exponent + Complex64::new(0.0, self.delta * u)).exp()
    }

    /// Location of the standardized variable: `W = τ Z + shift`.
    fn shift(&self) -> f64 {
        if self.alpha == 1.0 {
            self.delta + FRAC_2_PI * self.beta * self.tau * self.tau.ln()
        } else {
            self.delta
        }
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.shift()) / self.tau
    }

    fn closed_form(&self, policy: &EvalPolicy) -> Option<ClosedForm> {
        let form = ClosedForm::detect(self.alpha, self.beta);
        if policy.closed_forms || form == Some(ClosedForm::Cauchy) {
            // The angular representation does not cover the Cauchy law.
            form
        } else {
            None
        }
    }

    pub(crate) fn std_mass(&self, z: f64, side: Side, policy: &EvalPolicy) -> Result<f64> {
        if z.is_infinite() {
            let below = z < 0.0;
            return Ok(match (side, below) {
                (Side::Lower, true) | (Side::Upper, false) => 0.0,
                _ => 1.0,
            });
        }
        match self.closed_form(policy) {
            Some(form) => Ok(form.mass(z, side)),
            None => integral::mass(self.alpha, self.beta, z, side, policy),
        }
    }

    /// `P(W ≤ x)`.
    pub fn cdf(&self, x: f64, policy: &EvalPolicy) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::InvalidParameter {
                name: "x",
                value: x,
                reason: "must not be NaN",
            });
        }
        self.std_mass(self.standardize(x), Side::Lower, policy)
    }

    /// `P(W > x)`, computed directly so the upper tail keeps its relative
    /// precision.
    pub fn sf(&self, x: f64, policy: &EvalPolicy) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::InvalidParameter {
                name: "x",
                value: x,
                reason: "must not be NaN",
            });
        }
        self.std_mass(self.standardize(x), Side::Upper, policy)
    }

    pub fn pdf(&self, x: f64, policy: &EvalPolicy) -> Result<f64> {
        check_param("x", x, true, "must be finite")?;
        let z = self.standardize(x);
        let d = match self.closed_form(policy) {
            Some(form) => form.density(z),
            None => integral::density(self.alpha, self.beta, z, policy)?,
        };
        Ok(d / self.tau)
    }

    /// Smallest `x` with `P(W ≤ x) ≥ p`.
    pub fn quantile(&self, p: f64, policy: &EvalPolicy) -> Result<f64> {
        check_probability(p)?;
        let z = if p <= 0.5 {
            self.std_inverse(p, Side::Lower, policy, None)?
        } else {
            self.std_inverse(1.0 - p, Side::Upper, policy, None)?
        };
        Ok(self.tau * z + self.shift())
    }

    /// Point with upper tail mass `q`, i.e. `quantile(1 - q)` without forming
    /// `1 - q`.
    pub fn isf(&self, q: f64, policy: &EvalPolicy) -> Result<f64> {
        check_probability(q)?;
        let z = if q <= 0.5 {
            self.std_inverse(q, Side::Upper, policy, None)?
        } else {
            self.std_inverse(1.0 - q, Side::Lower, policy, None)?
        };
        Ok(self.tau * z + self.shift())
    }

    /// Standardized point `z` whose `side` tail mass equals `m ∈ (0, 1/2]`.
    ///
    /// The search runs in `t = ln|z|` on `ln mass − ln m`, which is close to
    /// linear in the tails. `hint` is a starting value of `t`.
    pub(crate) fn std_inverse(
        &self,
        m: f64,
        side: Side,
        policy: &EvalPolicy,
        hint: Option<f64>,
    ) -> Result<f64> {
        if let Some(form) = self.closed_form(policy) {
            return Ok(form.inverse(m, side));
        }
        let (alpha, beta) = (self.alpha, self.beta);

        // Which half-line holds the answer.
        let at_zero = self.std_mass(0.0, side, policy)?;
        if (at_zero - m).abs() <= f64::EPSILON * m {
            return Ok(0.0);
        }
        let sign = match side {
            Side::Lower if m > at_zero => 1.0,
            Side::Lower => -1.0,
            Side::Upper if m < at_zero => 1.0,
            Side::Upper => -1.0,
        };

        let log_m = m.ln();
        let objective = |t: f64| -> Result<f64> {
            let mass = self.std_mass(sign * t.exp(), side, policy)?;
            Ok(mass.max(f64::MIN_POSITIVE).ln() - log_m)
        };

        // Starting point: the power-law tail when it applies, else |z| = 1.
        let on_heavy_tail = match side {
            Side::Upper => sign > 0.0 && beta > -1.0,
            Side::Lower => sign < 0.0 && beta < 1.0,
        };
        let tail_guess = if on_heavy_tail && m < policy.tail_switch && alpha < 2.0 {
            let b = if side == Side::Upper { beta } else { -beta };
            Some(tail_upper_inverse(alpha, b, m).ln())
        } else {
            None
        };
        let t0 = hint.or(tail_guess).unwrap_or(0.0);
        if !t0.is_finite() {
            return Err(Error::QuantileOverflow { p: m });
        }
        let step0 = if hint.is_some() { 0.05 } else { 0.5 };

        // Expand a bracket in t. The objective falls as t grows when moving
        // into the tail that is being measured.
        let f0 = objective(t0)?;
        if f0 == 0.0 {
            return Ok(sign * t0.exp());
        }
        let rising = (side == Side::Lower) == (sign > 0.0);
        // Move up in t when the current mass is too large and shrinking with t,
        // or too small and growing with t.
        let up = (f0 > 0.0) != rising;
        let mut step = if up { step0 } else { -step0 };
        let (mut a, mut fa) = (t0, f0);
        let mut bracket = None;
        for _ in 0..policy.max_iter {
            let b = a + step;
            if b > f64::MAX.ln() {
                return Err(Error::QuantileOverflow { p: m });
            }
            if b < -700.0 {
                // The answer sits at the origin to within f64 resolution.
                return Ok(0.0);
            }
            let fb = objective(b)?;
            if fb.signum() != fa.signum() || fb == 0.0 {
                bracket = Some((a, fa, b, fb));
                break;
            }
            a = b;
            fa = fb;
            step *= 2.0;
        }
        let (a, fa, b, fb) = bracket.ok_or(Error::BracketFailure {
            p: m,
            iterations: policy.max_iter,
        })?;

        let mut failure = None;
        let root = roots::brent(
            |t| match objective(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            fa,
            fb,
            1e-13,
            policy.max_iter,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        if !root.converged || root.fx.abs() > policy.quantile_tol.max(1e-12) {
            return Err(Error::RootNonConvergence {
                p: m,
                iterations: root.iterations,
            });
        }
        Ok(sign * root.x.exp())
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// `c_α = sin(πα/2) Γ(α) / π`, the constant of the power-law tails.
pub fn tail_constant(alpha: f64) -> f64 {
    (FRAC_PI_2 * alpha).sin() * gamma(alpha) / PI
}

/// Power-law approximation `c_α (1 + β) x^{−α}` of `P(W > x)` for a
/// standardized law, valid as `x → ∞` when `0 < α < 2` and `β > −1`.
pub fn tail_upper_approx(alpha: f64, beta: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    tail_constant(alpha) * (1.0 + beta) * x.powf(-alpha)
}

/// Power-law approximation `c_α (1 − β) x^{−α}` of `P(W < −x)`. Zero for
/// `β = 1`, where the left tail is lighter than any power.
pub fn tail_lower_approx(alpha: f64, beta: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    tail_constant(alpha) * (1.0 - beta) * x.powf(-alpha)
}

/// Inverse of [`tail_upper_approx`] in `x`: `[c_α (1 + β) / q]^{1/α}`.
pub fn tail_upper_inverse(alpha: f64, beta: f64, q: f64) -> f64 {
    (((tail_constant(alpha) * (1.0 + beta)).ln() - q.ln()) / alpha).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn policy() -> EvalPolicy {
        EvalPolicy::default()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(StableParams::new(0.0, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(2.1, 0.0, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 1.2, 1.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 0.0, 0.0).is_err());
        assert!(StableParams::new(1.5, 0.0, 1.0, f64::NAN).is_err());
        assert!(StableParams::new(f64::NAN, 0.0, 1.0, 0.0).is_err());
        let s = StableParams::standard(0.7, -1.0).unwrap();
        assert!(s.is_standard());
    }

    #[test]
    fn policy_validation() {
        assert!(EvalPolicy::default().validate().is_ok());
        let bad = EvalPolicy {
            tail_switch: 0.5,
            ..EvalPolicy::default()
        };
        assert!(bad.validate().is_err());
        let bad = EvalPolicy {
            cdf_abs_tol: 0.0,
            ..EvalPolicy::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn char_fn_examples() {
        let cauchy = StableParams::standard(1.0, 0.0).unwrap();
        let v = cauchy.char_fn(1.0);
        assert!((v.re - (-1f64).exp()).abs() < 1e-15 && v.im.abs() < 1e-15);
        let gauss = StableParams::standard(2.0, 0.0).unwrap();
        assert!((gauss.char_fn(1.0).re - (-1f64).exp()).abs() < 1e-15);
        for p in [
            StableParams::new(0.3, 0.9, 2.0, -1.0).unwrap(),
            StableParams::new(1.0, -0.4, 0.5, 3.0).unwrap(),
        ] {
            assert_eq!(p.char_fn(0.0), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn char_fn_is_hermitian() {
        let p = StableParams::new(1.3, 0.6, 1.7, 0.4).unwrap();
        for u in [0.1, 1.0, 3.3] {
            let a = p.char_fn(u);
            let b = p.char_fn(-u);
            assert!((a - b.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn cauchy_examples() {
        let c = StableParams::standard(1.0, 0.0).unwrap();
        assert!((c.cdf(1.0, &policy()).unwrap() - 0.75).abs() < 1e-15);
        assert!((c.pdf(0.0, &policy()).unwrap() - 1.0 / PI).abs() < 1e-15);
        assert_eq!(c.quantile(0.5, &policy()).unwrap(), 0.0);
        let q = c.quantile(0.975, &policy()).unwrap();
        assert!((q - (PI * 0.475).tan()).abs() < 1e-11, "{q}");
    }

    #[test]
    fn gauss_density_peak() {
        let g = StableParams::standard(2.0, 0.0).unwrap();
        assert!((g.pdf(0.0, &policy()).unwrap() - 0.5 / PI.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn infinite_arguments() {
        let p = StableParams::standard(1.4, 0.2).unwrap();
        assert_eq!(p.cdf(f64::INFINITY, &policy()).unwrap(), 1.0);
        assert_eq!(p.cdf(f64::NEG_INFINITY, &policy()).unwrap(), 0.0);
        assert!(p.cdf(f64::NAN, &policy()).is_err());
    }

    #[test]
    fn quantile_rejects_bad_probabilities() {
        let p = StableParams::standard(1.4, 0.2).unwrap();
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                p.quantile(bad, &policy()),
                Err(Error::InvalidProbability(_))
            ));
            assert!(matches!(
                p.isf(bad, &policy()),
                Err(Error::InvalidProbability(_))
            ));
        }
    }

    #[test]
    fn tail_constants() {
        assert!((tail_constant(1.0) - 1.0 / PI).abs() < 1e-15);
        let lower = tail_lower_approx(0.5, -1.0, 10.0);
        let direct = (PI / 4.0).sin() * PI.sqrt() / PI * 2.0 * 10f64.powf(-0.5);
        assert!((lower - direct).abs() < 1e-15);
        assert_eq!(tail_lower_approx(1.3, 1.0, 5.0), 0.0);
        let x = tail_upper_inverse(0.1, 1.0, 1e-6);
        assert!((tail_upper_approx(0.1, 1.0, x) / 1e-6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_tail_ratio() {
        let approx = tail_upper_approx(1.0, 0.0, 100.0);
        assert!((approx - 1.0 / (100.0 * PI)).abs() < 1e-15);
        let exact = (0.01f64).atan() / PI;
        assert!((exact / approx - 1.0).abs() < 1e-4);
    }

    #[test]
    fn scale_and_location() {
        let base = StableParams::standard(1.5, 0.5).unwrap();
        let moved = StableParams::new(1.5, 0.5, 2.0, 3.0).unwrap();
        let pol = policy();
        let a = base.cdf(0.4, &pol).unwrap();
        let b = moved.cdf(2.0 * 0.4 + 3.0, &pol).unwrap();
        assert!((a - b).abs() < 1e-14);
        let d = moved.pdf(3.8, &pol).unwrap() * 2.0 - base.pdf(0.4, &pol).unwrap();
        assert!(d.abs() < 1e-12);
        // α = 1 carries the extra (2/π) β τ ln τ shift.
        let one = StableParams::new(1.0, 0.5, 2.0, 0.0).unwrap();
        let std1 = StableParams::standard(1.0, 0.5).unwrap();
        let x = 2.0 * 0.3 + FRAC_2_PI * 0.5 * 2.0 * 2f64.ln();
        assert!((one.cdf(x, &pol).unwrap() - std1.cdf(0.3, &pol).unwrap()).abs() < 1e-13);
    }
}
