//! Turning response and macroscopic velocity law.
//!
//! The turning rate of a cell moving with velocity `v` in a chemical gradient
//! `s` is `Φ(v s) = φ0 (1 + φ(v s))` with `φ` odd, non-increasing and equal to
//! `∓λ` outside `[-α, α]`. In the hydrodynamic limit cells drift with the
//! macroscopic velocity `a(s) = -c φ(c s)`, and the flux is written in terms
//! of the even antiderivative `A` of `a` with `A(0) = 0`.
//!
//! Every function here is evaluated on `|s|` and the sign is applied
//! afterwards so that oddness of `φ`, `a` and evenness of `A` hold bit for bit.

use crate::error::{Error, Result};
use std::fmt;

/// Shape of the velocity law `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VelocityLaw {
    /// `φ` is an odd quintic smoothstep on `[-α, α]`, saturating outside.
    Smooth,
    /// `α = 0`: `φ(x) = -λ sign(x)`.
    Step,
    /// `a(s) = s`, `A(s) = s²/2`; the aggregation-equation limit.
    Identity,
}

impl VelocityLaw {
    pub fn name(self) -> &'static str {
        match self {
            VelocityLaw::Smooth => "smooth",
            VelocityLaw::Step => "step",
            VelocityLaw::Identity => "identity",
        }
    }
}

impl fmt::Display for VelocityLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for VelocityLaw {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "smooth" => Ok(VelocityLaw::Smooth),
            "step" => Ok(VelocityLaw::Step),
            "identity" | "identitya" | "id" => Ok(VelocityLaw::Identity),
            other => Err(format!("unknown velocity law `{other}` (smooth|step|identity)")),
        }
    }
}

/// Physical parameters of the run-and-tumble model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChemoModel {
    /// Cell speed.
    pub c: f64,
    /// Mean turning rate.
    pub phi0: f64,
    /// Bias amplitude, strictly inside `(0, 1)`.
    pub lambda: f64,
    /// Gradient threshold of the turning response.
    pub alpha: f64,
    pub law: VelocityLaw,
}

/// Odd quintic smoothstep `u (15 - 10u² + 3u⁴) / 8`, valid for `0 <= u <= 1`.
#[inline]
fn smoothstep(u: f64) -> f64 {
    let u2 = u * u;
    u * (15.0 + u2 * (-10.0 + 3.0 * u2)) / 8.0
}

/// Antiderivative of [`smoothstep`] vanishing at zero: `u² (15 - 5u² + u⁴) / 16`.
#[inline]
fn smoothstep_integral(u: f64) -> f64 {
    let u2 = u * u;
    u2 * (15.0 + u2 * (-5.0 + u2)) / 16.0
}

/// `smoothstep_integral(1)`.
const SMOOTHSTEP_INTEGRAL_ONE: f64 = 11.0 / 16.0;

/// `sup |s'|`, attained at the origin.
const SMOOTHSTEP_MAX_SLOPE: f64 = 15.0 / 8.0;

#[inline]
fn signum_or_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl ChemoModel {
    pub fn new(c: f64, phi0: f64, lambda: f64, alpha: f64, law: VelocityLaw) -> Result<Self> {
        let model = ChemoModel {
            c,
            phi0,
            lambda,
            alpha,
            law,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn smooth(c: f64, phi0: f64, lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(c, phi0, lambda, alpha, VelocityLaw::Smooth)
    }

    pub fn step(c: f64, phi0: f64, lambda: f64) -> Result<Self> {
        Self::new(c, phi0, lambda, 0.0, VelocityLaw::Step)
    }

    /// `a = Id`. The kinetic parameters are kept for bookkeeping only.
    pub fn identity() -> Self {
        ChemoModel {
            c: 1.0,
            phi0: 1.0,
            lambda: 0.5,
            alpha: 0.0,
            law: VelocityLaw::Identity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key, reason: &str| {
            Err(Error::InvalidModel {
                key,
                reason: reason.to_string(),
            })
        };
        if !(self.c.is_finite() && self.c > 0.0) {
            return bad("c", "must be finite and > 0");
        }
        if !(self.phi0.is_finite() && self.phi0 > 0.0) {
            return bad("phi0", "must be finite and > 0");
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return bad("lambda", "must lie in (0, 1)");
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad("alpha", "must be finite and >= 0");
        }
        match self.law {
            VelocityLaw::Step if self.alpha != 0.0 => bad("alpha", "step law requires alpha = 0"),
            VelocityLaw::Smooth if self.alpha <= 0.0 => {
                bad("alpha", "smooth law requires alpha > 0")
            }
            _ => Ok(()),
        }
    }

    /// Turning bias `φ(x)`; `None` for the identity law, which has no
    /// kinetic counterpart.
    pub fn turning_bias(&self, x: f64) -> Option<f64> {
        let sign = signum_or_zero(x);
        let mag = match self.law {
            VelocityLaw::Step => self.lambda,
            VelocityLaw::Smooth => self.lambda * smoothstep((x.abs() / self.alpha).min(1.0)),
            VelocityLaw::Identity => return None,
        };
        Some(-sign * mag)
    }

    /// Turning rate `Φ(x) = φ0 (1 + φ(x))`.
    pub fn turning_rate(&self, x: f64) -> Option<f64> {
        self.turning_bias(x).map(|phi| self.phi0 * (1.0 + phi))
    }

    /// Macroscopic velocity `a(s)` for a chemical gradient `s`.
    #[inline]
    pub fn velocity(&self, s: f64) -> f64 {
        let sign = signum_or_zero(s);
        let mag = match self.law {
            VelocityLaw::Step => self.lambda * self.c,
            VelocityLaw::Smooth => {
                self.lambda * self.c * smoothstep((self.c * s.abs() / self.alpha).min(1.0))
            }
            VelocityLaw::Identity => s.abs(),
        };
        sign * mag
    }

    /// Flux potential `A(s) = ∫₀ˢ a`, closed form.
    #[inline]
    pub fn velocity_potential(&self, s: f64) -> f64 {
        let r = s.abs();
        match self.law {
            VelocityLaw::Step => self.lambda * self.c * r,
            VelocityLaw::Identity => 0.5 * r * r,
            VelocityLaw::Smooth => {
                let kink = self.alpha / self.c;
                if r >= kink {
                    self.lambda * self.c * (r - kink) + self.lambda * self.alpha * SMOOTHSTEP_INTEGRAL_ONE
                } else {
                    self.lambda * self.alpha * smoothstep_integral(r / kink)
                }
            }
        }
    }

    /// Largest value of `|a|`, or `None` when unbounded.
    pub fn max_speed(&self) -> Option<f64> {
        match self.law {
            VelocityLaw::Smooth | VelocityLaw::Step => Some(self.lambda * self.c),
            VelocityLaw::Identity => None,
        }
    }

    /// `sup |φ'|`. Infinite for the step law, undefined for the identity law.
    pub fn max_bias_slope(&self) -> Option<f64> {
        match self.law {
            VelocityLaw::Smooth => Some(SMOOTHSTEP_MAX_SLOPE * self.lambda / self.alpha),
            VelocityLaw::Step | VelocityLaw::Identity => None,
        }
    }

    /// Lipschitz constant of `a`: `c² sup|φ'|` for the smooth law, 1 for `a = Id`.
    pub fn velocity_lipschitz(&self) -> Option<f64> {
        match self.law {
            VelocityLaw::Smooth => self.max_bias_slope().map(|l| self.c * self.c * l),
            VelocityLaw::Identity => Some(1.0),
            VelocityLaw::Step => None,
        }
    }

    /// Gradient magnitudes where `a` stops varying (`α / c`).
    pub fn kink(&self) -> f64 {
        match self.law {
            VelocityLaw::Smooth => self.alpha / self.c,
            _ => 0.0,
        }
    }
}

impl Default for ChemoModel {
    fn default() -> Self {
        ChemoModel {
            c: 1.0,
            phi0: 1.0,
            lambda: 0.8,
            alpha: 0.1,
            law: VelocityLaw::Smooth,
        }
    }
}
