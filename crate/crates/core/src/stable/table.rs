//! Precomputed inverse survival function for repeated evaluation.
//!
//! Nodes are equally spaced in `y = logit(q)` for the upper tail mass `q`;
//! between nodes `asinh(z)` is interpolated by cubic Hermite polynomials using
//! exact slopes from the density. `asinh` keeps the far tails, where `z` grows
//! like `q^{−1/α}`, close to linear in `y`.

use super::{EvalPolicy, Side, StableParams};
use crate::error::{check_param, Result};

#[derive(Debug, Clone)]
pub struct QuantileTable {
    params: StableParams,
    y0: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

/// `ln(q / (1 − q))`.
pub fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

fn logistic_pair(y: f64) -> (f64, f64) {
    // (q, 1 − q) without cancellation.
    if y <= 0.0 {
        let e = y.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    } else {
        let e = (-y).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    }
}

impl QuantileTable {
    /// Tabulates `z(q) = isf(q)` of the standardized law `S(α, β)` for
    /// `q ∈ [lo, hi]` on `intervals` equal steps in `logit(q)`.
    pub fn new(
        alpha: f64,
        beta: f64,
        lo: f64,
        hi: f64,
        intervals: usize,
        policy: &EvalPolicy,
    ) -> Result<Self> {
        let params = StableParams::standard(alpha, beta)?;
        check_param("lo", lo, lo > 0.0 && lo < hi, "must satisfy 0 < lo < hi")?;
        check_param("hi", hi, hi < 1.0, "must be below 1")?;
        let intervals = intervals.max(1);
        let y0 = logit(lo);
        let step = (logit(hi) - y0) / intervals as f64;
        let mut values = Vec::with_capacity(intervals + 1);
        let mut slopes = Vec::with_capacity(intervals + 1);
        let mut hint: Option<(Side, f64)> = None;
        for k in 0..=intervals {
            let y = y0 + step * k as f64;
            let (q, q_bar) = logistic_pair(y);
            let (mass, side) = if q <= 0.5 {
                (q, Side::Upper)
            } else {
                (q_bar, Side::Lower)
            };
            let t_hint = match hint {
                Some((s, t)) if s == side => Some(t),
                _ => None,
            };
            let z = params.std_inverse(mass, side, policy, t_hint)?;
            hint = (z != 0.0).then(|| (side, z.abs().ln()));
            let density = params.pdf(z, policy)?;
            // dz/dy = −q(1 − q) / f(z); d asinh(z)/dz = 1/√(1 + z²).
            let dz_dy = -q * q_bar / density;
            values.push(z.asinh());
            slopes.push(dz_dy / z.hypot(1.0));
        }
        Ok(QuantileTable {
            params,
            y0,
            step,
            values,
            slopes,
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    /// Range of upper tail masses covered.
    pub fn range(&self) -> (f64, f64) {
        let n = self.values.len() - 1;
        (
            logistic_pair(self.y0).0,
            logistic_pair(self.y0 + self.step * n as f64).0,
        )
    }

    /// Interpolated `isf(q)`; `q` is clamped to the tabulated range.
    pub fn isf(&self, q: f64) -> f64 {
        self.isf_logit(logit(q))
    }

    /// Interpolated `isf` at `y = logit(q)`, for callers that reuse `y`
    /// across several tables.
    pub fn isf_logit(&self, y: f64) -> f64 {
        let last = self.values.len() - 1;
        let s = ((y - self.y0) / self.step).clamp(0.0, last as f64);
        let k = (s.floor() as usize).min(last.saturating_sub(1));
        if last == 0 {
            return self.values[0].sinh();
        }
        let t = s - k as f64;
        let (u0, u1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.step, self.slopes[k + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let u = (2.0 * t3 - 3.0 * t2 + 1.0) * u0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * u1
            + (t3 - t2) * m1;
        u.sinh()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_pair_is_exact_complement() {
        for y in [-30.0, -2.0, 0.0, 1.5, 25.0] {
            let (q, qb) = logistic_pair(y);
            assert!((q + qb - 1.0).abs() < 1e-15);
            assert!((qb / q - (-y).exp()).abs() < 1e-13 * (-y).exp());
        }
        for y in [-12.0, -0.4, 0.0, 3.0, 12.0] {
            assert!((logit(logistic_pair(y).0) - y).abs() < 1e-10);
        }
    }

    #[test]
    fn cauchy_table_matches_closed_form() {
        let pol = EvalPolicy::default();
        let table = QuantileTable::new(1.0, 0.0, 1e-6, 1.0 - 1e-6, 256, &pol).unwrap();
        for q in [1e-6, 3e-5, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-6] {
            let exact = 1.0 / (std::f64::consts::PI * q).tan();
            let got = table.isf(q);
            assert!(
                ((got - exact) / exact.abs().max(1.0)).abs() < 1e-7,
                "{q}: {got} vs {exact}"
            );
        }
    }
}
