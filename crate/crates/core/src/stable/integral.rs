//! Zolotarev-type integral representation of the standardized S1 law, in the
//! form popularized by Nolan: on the positive half-line the distribution
//! function and the density are integrals over a finite angle of
//! `exp(-g(θ))` and `g(θ) exp(-g(θ))`, where `g` is monotone in `θ`.
//!
//! All work is done in log space (`h = ln g`) so that the steep exponent
//! `α / (α - 1)` near `α = 1` cannot overflow, and the angle is measured from
//! both ends of the interval so the trigonometric factors keep full relative
//! precision close to the endpoints.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};

use super::EvalPolicy;
use crate::error::{Error, Result};
use crate::quad;
use crate::roots;

const MAX_SUBINTERVALS: usize = 400;
const REL_TOL: f64 = 1e-13;

/// Which tail mass to return: `P(Z < z)` or `P(Z > z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Lower,
    Upper,
}

impl Side {
    pub(crate) fn flip(self) -> Side {
        match self {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
        }
    }
}

/// `ln g` on the integration interval `(0, len)`, for a fixed positive
/// abscissa. `phi` is the distance from the left end and `psi` the distance
/// from the right end; both are supplied so each factor can use whichever is
/// better conditioned.
trait LogKernel {
    fn len(&self) -> f64;
    fn log_g(&self, phi: f64, psi: f64) -> f64;
}

/// `α ≠ 1`, abscissa `z > 0`. Angle variable `φ = θ + θ₀ ∈ (0, π/2 + θ₀)`.
struct Zolotarev {
    alpha: f64,
    len: f64,
    exponent: f64,
    offset: f64,
    // π/2 − θ₀ and its counterpart at the right end.
    lead_lo: f64,
    lead_hi: f64,
    // π − α·len, so that sin(αφ) = sin(αψ + tail_sin).
    tail_sin: f64,
}

impl Zolotarev {
    fn new(alpha: f64, beta: f64, z: f64) -> Self {
        let theta0 = theta0(alpha, beta);
        let len = FRAC_PI_2 + theta0;
        let exponent = alpha / (alpha - 1.0);
        let offset = exponent * z.ln() + (alpha * theta0).cos().ln() / (alpha - 1.0);
        let lead_lo = FRAC_PI_2 - theta0;
        Zolotarev {
            alpha,
            len,
            exponent,
            offset,
            lead_lo,
            lead_hi: lead_lo + (1.0 - alpha) * len,
            tail_sin: PI - alpha * len,
        }
    }
}

impl LogKernel for Zolotarev {
    fn len(&self) -> f64 {
        self.len
    }

    fn log_g(&self, phi: f64, psi: f64) -> f64 {
        let near_left = phi < 0.5 * self.len;
        // cos θ
        let cos_theta = if near_left {
            (phi + self.lead_lo).sin()
        } else {
            psi.sin()
        };
        // sin(α(θ₀ + θ))
        let sin_a = if near_left {
            (self.alpha * phi).sin()
        } else {
            (self.alpha * psi + self.tail_sin).sin()
        };
        // cos(αθ₀ + (α − 1)θ) = sin(π/2 − θ₀ + (1 − α)φ)
        let cos_mix = if near_left {
            (self.lead_lo + (1.0 - self.alpha) * phi).sin()
        } else {
            (self.lead_hi + (self.alpha - 1.0) * psi).sin()
        };
        self.offset + self.exponent * (cos_theta.ln() - sin_a.ln()) + cos_mix.ln() - cos_theta.ln()
    }
}

/// `α = 1`, `β > 0`, any real abscissa. Angle variable `φ = θ + π/2 ∈ (0, π)`.
struct AlphaOne {
    beta: f64,
    offset: f64,
}

impl LogKernel for AlphaOne {
    fn len(&self) -> f64 {
        PI
    }

    fn log_g(&self, phi: f64, psi: f64) -> f64 {
        let cos_theta = if phi < FRAC_PI_2 {
            phi.sin()
        } else {
            psi.sin()
        };
        // sin θ = −cos φ
        let sin_theta = if phi < FRAC_PI_2 {
            -phi.cos()
        } else {
            psi.cos()
        };
        let lead = (1.0 - self.beta) * FRAC_PI_2 + self.beta * phi;
        self.offset + FRAC_2_PI.ln() + lead.ln() - cos_theta.ln()
            + lead * sin_theta / (cos_theta * self.beta)
    }
}

pub(crate) fn theta0(alpha: f64, beta: f64) -> f64 {
    (beta * (FRAC_PI_2 * alpha).tan()).atan() / alpha
}

/// `P(Z < 0)` for `α ≠ 1`.
pub(crate) fn mass_below_zero(alpha: f64, beta: f64) -> f64 {
    (FRAC_PI_2 - theta0(alpha, beta)) / PI
}

/// Levels of `ln g` used as quadrature breakpoints. The integrands change
/// from flat to negligible across `g ≈ 1`, and where `g` is small they behave
/// like `g` itself, which in the tails is a high power of the distance to an
/// endpoint. Cutting at a ladder of levels keeps every panel well resolved;
/// below `e^{-36}` the remaining contribution is negligible.
const SPLIT_LEVELS: [f64; 9] = [-36.0, -24.0, -16.0, -10.0, -6.0, -3.0, 0.0, 2.0, 4.0];

/// Angles where `ln g` crosses each of [`SPLIT_LEVELS`], in increasing order.
fn split_points<K: LogKernel>(kernel: &K) -> Vec<f64> {
    let len = kernel.len();
    let eps = len * 1e-9;
    let h = |phi: f64| kernel.log_g(phi, len - phi);
    let (lo, hi) = (eps, len - eps);
    let (h_lo, h_hi) = (h(lo), h(hi));
    let mut points = Vec::with_capacity(SPLIT_LEVELS.len());
    if !(h_lo.is_finite() && h_hi.is_finite()) {
        return points;
    }
    // Next to the left end the crossings can sit at angles far below `eps`
    // (small |z|); they are located in `ln φ`.
    let (t_min, t_lo) = ((len * 1e-300).ln(), lo.ln());
    let h_min = h(t_min.exp());
    for level in SPLIT_LEVELS {
        let (f_lo, f_hi) = (h_lo - level, h_hi - level);
        if f_lo.signum() != f_hi.signum() {
            let root = roots::brent(|phi| h(phi) - level, lo, hi, f_lo, f_hi, len * 1e-12, 100);
            points.push(root.x);
        } else if h_min.is_finite() && (h_min - level).signum() != f_lo.signum() {
            let root = roots::brent(
                |t| h(t.exp()) - level,
                t_min,
                t_lo,
                h_min - level,
                f_lo,
                1e-10,
                200,
            );
            points.push(root.x.exp());
        }
    }
    points.sort_by(f64::total_cmp);
    points
}

#[derive(Clone, Copy)]
enum Integrand {
    Survive,
    Consume,
    Density,
}

fn integrate_kernel<K: LogKernel>(kernel: &K, which: Integrand, abs_tol: f64) -> Result<f64> {
    let len = kernel.len();
    if len <= 0.0 {
        return Ok(0.0);
    }
    let f = |phi: f64| {
        let h = kernel.log_g(phi, len - phi);
        if h.is_nan() {
            return 0.0;
        }
        match which {
            Integrand::Survive => (-(h.exp())).exp(),
            Integrand::Consume => -(-(h.exp())).exp_m1(),
            Integrand::Density => {
                if h > 709.0 {
                    0.0
                } else {
                    let g = h.exp();
                    g * (-g).exp()
                }
            }
        }
    };
    let breaks = split_points(kernel);
    let r = quad::integrate(f, 0.0, len, &breaks, 0.0, REL_TOL, MAX_SUBINTERVALS);
    if r.abs_error > abs_tol && r.abs_error > REL_TOL * 1e3 * r.value.abs() {
        return Err(Error::QuadratureNonConvergence {
            error: r.abs_error,
            tolerance: abs_tol,
        });
    }
    Ok(r.value)
}

/// Tail mass of the standardized S1 law on one side of `z`.
///
/// Handles every `(α, β)` except `α = 1, β = 0`, which is the Cauchy law and
/// has no angular representation of this form.
pub(crate) fn mass(alpha: f64, beta: f64, z: f64, side: Side, policy: &EvalPolicy) -> Result<f64> {
    let abs_tol = policy.cdf_abs_tol * PI;
    if alpha == 1.0 {
        debug_assert!(beta != 0.0);
        if beta < 0.0 {
            return mass(alpha, -beta, -z, side.flip(), policy);
        }
        let kernel = AlphaOne {
            beta,
            offset: -PI * z / (2.0 * beta),
        };
        let which = match side {
            Side::Lower => Integrand::Survive,
            Side::Upper => Integrand::Consume,
        };
        return Ok(integrate_kernel(&kernel, which, abs_tol)? / PI);
    }

    if z < 0.0 {
        return mass(alpha, -beta, -z, side.flip(), policy);
    }
    let below = mass_below_zero(alpha, beta);
    if z == 0.0 {
        return Ok(match side {
            Side::Lower => below,
            Side::Upper => 1.0 - below,
        });
    }
    let kernel = Zolotarev::new(alpha, beta, z);
    // α < 1: P(Z < z) = P(Z < 0) + ∫exp(−g)/π and P(Z > z) = ∫(1 − exp(−g))/π.
    // α > 1: the roles of the two integrands swap.
    let which = match (side, alpha < 1.0) {
        (Side::Lower, true) | (Side::Upper, false) => Integrand::Survive,
        (Side::Upper, true) | (Side::Lower, false) => Integrand::Consume,
    };
    let integral = integrate_kernel(&kernel, which, abs_tol)? / PI;
    Ok(match side {
        Side::Lower => (below + integral).min(1.0),
        Side::Upper => integral,
    })
}

/// Density of the standardized S1 law, same coverage as [`mass`].
pub(crate) fn density(alpha: f64, beta: f64, z: f64, policy: &EvalPolicy) -> Result<f64> {
    let abs_tol = policy.cdf_abs_tol;
    if alpha == 1.0 {
        debug_assert!(beta != 0.0);
        if beta < 0.0 {
            return density(alpha, -beta, -z, policy);
        }
        let kernel = AlphaOne {
            beta,
            offset: -PI * z / (2.0 * beta),
        };
        return Ok(integrate_kernel(&kernel, Integrand::Density, abs_tol)? / (2.0 * beta));
    }
    if z < 0.0 {
        return density(alpha, -beta, -z, policy);
    }
    if z == 0.0 {
        let zeta = -beta * (FRAC_PI_2 * alpha).tan();
        let th0 = theta0(alpha, beta);
        return Ok(
            statrs::function::gamma::gamma(1.0 + 1.0 / alpha) * th0.cos()
                / (PI * (1.0 + zeta * zeta).powf(0.5 / alpha)),
        );
    }
    let kernel = Zolotarev::new(alpha, beta, z);
    let integral = integrate_kernel(&kernel, Integrand::Density, abs_tol * z)?;
    Ok(alpha * integral / (PI * (alpha - 1.0).abs() * z))
}
