//! Continuous lower-bound construction.
//!
//! Boxes below the cutoff `s` are ignored and `θ(k, x)` for `x >= s` is
//! averaged with weight `ω(x) = I / x^{a-1}`, `I = (a-2) s^{a-2}`, so
//! `μ(x) = ω(x)/x = I / x^a`. For each `t` the optimal survival profile is
//! `N(x, t) = min(1, α / μ(x)^{1/(k-1)})`, which equals 1 from
//! `x = γ(t)` on, where `γ` solves
//!
//! ```text
//! γ - t - s = γ (k-1)/(a+k-1) (1 - (s/γ)^{(a+k-1)/(k-1)})
//! ```
//!
//! The weighted average of `θ` is then `∫_0^∞ μ(γ)(γ - t - s) - M(γ) dt`
//! with `M(x) = -I / ((a-1) x^{a-1})`. Bounding `γ` from both sides gives
//! the closed form
//!
//! ```text
//! k/(a-1) (a/(a+k-1))^a - (a-2)(k-1)/(a-1)^2 (a/(a+k-1))^a
//! ```
//!
//! which tends to `4k/(k+1)^2` as `a -> 2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Integral, QuadratureOptions};

const BISECTION_CAP: usize = 200;
const GAMMA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundConfig {
    pub k: u32,
    /// Weight exponent, strictly above 2.
    pub a: f64,
    /// Cutoff below which boxes are ignored.
    pub s: f64,
    pub quadrature: QuadratureOptions,
}

impl LowerBoundConfig {
    pub fn new(k: u32, a: f64, s: f64) -> Result<Self> {
        let config = Self {
            k,
            a,
            s,
            quadrature: QuadratureOptions::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(invalid("k", "the construction needs k >= 2"));
        }
        if !(self.a > 2.0 && self.a.is_finite()) {
            return Err(invalid("a", "weight exponent must be strictly above 2"));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(invalid("s", "cutoff must be positive for the weights to normalize"));
        }
        Ok(())
    }

    /// `I = (a-2) s^{a-2}`
    pub fn normalizer(&self) -> f64 {
        (self.a - 2.0) * self.s.powf(self.a - 2.0)
    }

    pub fn mu(&self, x: f64) -> f64 {
        self.normalizer() / x.powf(self.a)
    }

    /// Antiderivative of `μ` vanishing at infinity.
    pub fn mu_antiderivative(&self, x: f64) -> f64 {
        -self.normalizer() / ((self.a - 1.0) * x.powf(self.a - 1.0))
    }

    /// `(a+k-1)/a`
    fn spread(&self) -> f64 {
        (self.a + f64::from(self.k) - 1.0) / self.a
    }

    /// Closed-form bracket `((a+k-1)/a t + s, (a+k-1)/a (t+s))` around `γ(t)`.
    pub fn gamma_bracket(&self, t: f64) -> (f64, f64) {
        let c = self.spread();
        (c * t + self.s, c * (t + self.s))
    }
}

/// Solves the `γ` equation for `μ ∝ x^{-a}` by bisection on
/// `[s + t, (a+k-1)/a (t+s)]`.
///
/// Only `a > 0` and `k >= 2` are needed here, so `s = 0` is allowed; there
/// `γ = (a+k-1)/a t`.
pub fn solve_gamma(k: u32, a: f64, s: f64, t: f64) -> Result<f64> {
    if k < 2 {
        return Err(invalid("k", "needs k >= 2"));
    }
    if !(a > 0.0) || !(s >= 0.0) || !(t >= 0.0) {
        return Err(invalid("a/s/t", "need a > 0, s >= 0, t >= 0"));
    }
    if t == 0.0 {
        return Ok(s);
    }
    let km1 = f64::from(k - 1);
    let share = km1 / (a + km1);
    let power = (a + km1) / km1;
    let excess = |g: f64| {
        let filled = if s == 0.0 { 1.0 } else { 1.0 - (s / g).powf(power) };
        g - t - s - g * share * filled
    };
    let (mut lo, mut hi) = (s + t, (a + km1) / a * (t + s));
    let (f_lo, f_hi) = (excess(lo), excess(hi));
    // Both signs hold analytically; at `hi` the excess is a tiny positive
    // number left after cancelling terms of size `t`, so allow rounding there.
    if !(f_lo <= 0.0 && f_hi >= -1e-12 * hi) {
        return Err(Error::Bracketing { lo, hi });
    }
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= GAMMA_TOL * hi.max(1.0) || mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Optimal continuous survival probability at `(x, t)`, `x >= s`.
///
/// Computed as `min(1, (μ(γ)/μ(x))^{1/(k-1)})`, which is
/// `α / μ(x)^{1/(k-1)}` with `α = μ(γ)^{1/(k-1)}`.
pub fn optimal_continuous_n(config: &LowerBoundConfig, x: f64, t: f64) -> Result<f64> {
    config.validate()?;
    if x < config.s {
        return Err(invalid("x", format!("must be at least the cutoff s = {}", config.s)));
    }
    let gamma = solve_gamma(config.k, config.a, config.s, t)?;
    if x >= gamma {
        return Ok(1.0);
    }
    let alpha = config.mu(gamma).powf(1.0 / f64::from(config.k - 1));
    Ok((alpha / config.mu(x).powf(1.0 / f64::from(config.k - 1))).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub config: LowerBoundConfig,
    /// `k/(a-1) (a/(a+k-1))^a`
    pub leading: f64,
    /// `(a-2)(k-1)/(a-1)^2 (a/(a+k-1))^a`, vanishing as `a -> 2`.
    pub correction: f64,
    /// `leading - correction`
    pub value: f64,
    /// Quadrature of the bounded integrand
    /// `I k/(a-1) (a/(a+k-1))^a (t + s/k) / (t+s)^a` whose exact value is `value`.
    pub quadrature: Integral,
}

impl LowerBound {
    pub fn quadrature_rel_error(&self) -> f64 {
        ((self.quadrature.value - self.value) / self.value).abs()
    }
}

/// Closed-form lower bound on `θ(k)` for the weights `ω(x) ∝ x^{1-a}`,
/// cross-checked by quadrature of the integrand it was derived from.
pub fn lowerbound_value(config: &LowerBoundConfig) -> Result<LowerBound> {
    config.validate()?;
    let (a, s, k) = (config.a, config.s, f64::from(config.k));
    let scale = (a / (a + k - 1.0)).powf(a);
    let leading = k / (a - 1.0) * scale;
    let correction = (a - 2.0) * (k - 1.0) / ((a - 1.0) * (a - 1.0)) * scale;
    let value = leading - correction;

    let factor = config.normalizer() * k / (a - 1.0) * scale;
    let integrand = |t: f64| factor * (t + s / k) / (t + s).powf(a);
    let horizon = 1e3 * s;
    let body = integrate(integrand, 0.0, horizon, config.quadrature)?;
    // ∫_U^∞ (u - s(k-1)/k) u^{-a} du with u = t + s
    let u = horizon + s;
    let tail = factor * (u.powf(2.0 - a) / (a - 2.0) - s * (k - 1.0) / k * u.powf(1.0 - a) / (a - 1.0));
    let quadrature = Integral {
        value: body.value + tail,
        ..body
    };
    Ok(LowerBound {
        config: *config,
        leading,
        correction,
        value,
        quadrature,
    })
}

/// `∫_0^∞ μ(γ)(γ - t - s) - M(γ) dt` with `γ(t)` solved exactly.
///
/// This is the weighted average of `θ` achieved by the optimal profile and
/// is at least [`lowerbound_value`]. The part beyond the horizon is enclosed
/// between the integrals with `γ` at either end of its closed-form bracket
/// (the integrand decreases in `γ`), and the horizon grows until that
/// enclosure is narrower than the absolute tolerance.
pub fn weighted_average_integral(config: &LowerBoundConfig) -> Result<Integral> {
    config.validate()?;
    let (a, s, k) = (config.a, config.s, f64::from(config.k));
    let norm = config.normalizer();
    let at = |g: f64, t: f64| norm / g.powf(a) * (a / (a - 1.0) * g - t - s);
    let integrand = |t: f64| match solve_gamma(config.k, a, s, t) {
        Ok(g) => at(g, t),
        Err(_) => f64::NAN,
    };
    let c = config.spread();
    // γ at the top of the bracket: ∫_T^∞ I k/(a-1) c^{-a} (t+s)^{1-a} dt
    let tail_low = |horizon: f64| norm * k / (a - 1.0) * c.powf(-a) * (horizon + s).powf(2.0 - a) / (a - 2.0);
    // γ at the bottom: v = c t + s, ∫_V^∞ c^{-1}/(a-1) (k (v-s)/c + s) v^{-a} dv
    let tail_high = |horizon: f64| {
        let v = c * horizon + s;
        norm / (c * (a - 1.0)) * (k / c * v.powf(2.0 - a) / (a - 2.0) + s * (1.0 - k / c) * v.powf(1.0 - a) / (a - 1.0))
    };
    let mut horizon = 1e2 * s;
    let mut previous = 0.0;
    let mut acc = Integral {
        value: 0.0,
        error: 0.0,
        subdivisions: 0,
    };
    loop {
        let piece = integrate(integrand, previous, horizon, config.quadrature)?;
        if !piece.value.is_finite() {
            return Err(Error::Bracketing {
                lo: previous,
                hi: horizon,
            });
        }
        acc.value += piece.value;
        acc.error += piece.error;
        acc.subdivisions += piece.subdivisions;
        let (lo, hi) = (tail_low(horizon), tail_high(horizon));
        let half_width = 0.5 * (hi - lo).abs();
        if half_width <= config.quadrature.abs_tol.max(config.quadrature.rel_tol * acc.value) {
            return Ok(Integral {
                value: acc.value + 0.5 * (lo + hi),
                error: acc.error + half_width,
                subdivisions: acc.subdivisions,
            });
        }
        if horizon > 1e15 * s {
            return Err(Error::Quadrature {
                achieved: acc.error + half_width,
                requested: config.quadrature.abs_tol,
            });
        }
        previous = horizon;
        horizon *= 10.0;
    }
}
