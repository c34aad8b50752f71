//! Closed forms for the three stable laws that have them, written in terms of
//! tail masses so both tails keep full relative precision.

use std::f64::consts::PI;

use statrs::function::erf::{erf, erf_inv, erfc, erfc_inv};

use super::integral::Side;

/// The standardized laws with elementary distribution functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ClosedForm {
    /// `α = 1, β = 0`.
    Cauchy,
    /// `α = 2`: normal with variance 2.
    Gauss,
    /// `α = 1/2, β = 1`, or its mirror image when `reflected`.
    Levy { reflected: bool },
}

impl ClosedForm {
    pub(crate) fn detect(alpha: f64, beta: f64) -> Option<Self> {
        if alpha == 2.0 {
            Some(ClosedForm::Gauss)
        } else if alpha == 1.0 && beta == 0.0 {
            Some(ClosedForm::Cauchy)
        } else if alpha == 0.5 && beta.abs() == 1.0 {
            Some(ClosedForm::Levy {
                reflected: beta < 0.0,
            })
        } else {
            None
        }
    }

    pub(crate) fn mass(self, z: f64, side: Side) -> f64 {
        match self {
            ClosedForm::Cauchy => {
                // P(Z > z) = atan2(1, z) / π, accurate in both tails.
                let s = match side {
                    Side::Upper => z,
                    Side::Lower => -z,
                };
                1f64.atan2(s) / PI
            }
            ClosedForm::Gauss => match side {
                Side::Upper => 0.5 * erfc(0.5 * z),
                Side::Lower => 0.5 * erfc(-0.5 * z),
            },
            ClosedForm::Levy { reflected: true } => {
                ClosedForm::Levy { reflected: false }.mass(-z, side.flip())
            }
            ClosedForm::Levy { reflected: false } => {
                if z <= 0.0 {
                    return match side {
                        Side::Lower => 0.0,
                        Side::Upper => 1.0,
                    };
                }
                let s = (0.5 / z).sqrt();
                match side {
                    Side::Lower => erfc(s),
                    Side::Upper => erf(s),
                }
            }
        }
    }

    pub(crate) fn density(self, z: f64) -> f64 {
        match self {
            ClosedForm::Cauchy => 1.0 / (PI * (1.0 + z * z)),
            ClosedForm::Gauss => (-0.25 * z * z).exp() / (2.0 * PI.sqrt()),
            ClosedForm::Levy { reflected: true } => {
                ClosedForm::Levy { reflected: false }.density(-z)
            }
            ClosedForm::Levy { reflected: false } => {
                if z <= 0.0 {
                    0.0
                } else {
                    (-0.5 / z - 1.5 * z.ln()).exp() / (2.0 * PI).sqrt()
                }
            }
        }
    }

    /// Point `z` with `mass(z, side) = m`, for `0 < m <= 1/2`.
    pub(crate) fn inverse(self, m: f64, side: Side) -> f64 {
        let sign = match side {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        };
        match self {
            ClosedForm::Cauchy if m > 0.25 => sign * (PI * (0.5 - m)).tan(),
            ClosedForm::Cauchy => sign / (PI * m).tan(),
            ClosedForm::Gauss => {
                // One Newton step polishes the deep-tail accuracy of erfc_inv.
                let z = 2.0 * erfc_inv(2.0 * m);
                let z = z + (self.mass(z, Side::Upper) - m) / self.density(z);
                sign * z
            }
            ClosedForm::Levy { reflected: true } => {
                -ClosedForm::Levy { reflected: false }.inverse(m, side.flip())
            }
            ClosedForm::Levy { reflected: false } => {
                let s = match side {
                    Side::Lower => erfc_inv(m),
                    Side::Upper => erf_inv(m),
                };
                let z = 0.5 / (s * s);
                let slope = match side {
                    Side::Lower => self.density(z),
                    Side::Upper => -self.density(z),
                };
                z - (self.mass(z, side) - m) / slope
            }
        }
    }
}
