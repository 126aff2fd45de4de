//! Closed-form evaluators for the VaR and CVaR concentration bounds, and
//! a sample-size solver that inverts them.
//!
//! The distribution-dependent constants (`c`, `c'`, `G`) have no general
//! formula, so every evaluator takes them as inputs; all results are
//! clipped to [0,1] since raw exponential forms can exceed one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::RiskLevel;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BoundsError {
    #[error("Unachievable: bound stays above target_delta={target_delta} for every n")]
    Unachievable { target_delta: f64 },
    #[error("target_delta={0} must be positive")]
    InvalidTargetDelta(f64),
}

/// Parameters of the light-tailed CVaR bound: tail pair `(sigma, b)`,
/// the VaR at the level of interest, and the free constant `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightBoundParams {
    pub sigma: f64,
    pub b: f64,
    pub v_alpha: f64,
    pub c: f64,
    pub alpha: RiskLevel,
}

impl LightBoundParams {
    /// `sigma^2 + v_alpha^2`, the variance proxy of the shifted tail.
    pub fn variance_proxy(&self) -> f64 {
        self.sigma * self.sigma + self.v_alpha * self.v_alpha
    }

    /// Threshold between the sub-Gaussian and sub-exponential regimes.
    pub fn epsilon_star(&self) -> f64 {
        self.variance_proxy() / (self.b * self.alpha.tail_mass())
    }
}

/// Parameters of the bounded-moment CVaR bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeavyBoundParams {
    pub p: f64,
    pub c: f64,
    pub alpha: RiskLevel,
}

/// Which branch of a two-regime bound applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SmallEpsilon,
    LargeEpsilon,
    NotApplicable,
}

/// A probability bound clipped to [0,1] plus the regime that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub probability_bound: f64,
    pub regime: Regime,
}

fn clip(raw: f64, regime: Regime) -> BoundValue {
    BoundValue {
        probability_bound: raw.clamp(0.0, 1.0),
        regime,
    }
}

/// VaR deviation bound: `2 exp(-2 n c eps^2)`.
pub fn var_bound(n: u64, eps: f64, c: f64) -> BoundValue {
    clip(2.0 * (-2.0 * n as f64 * c * eps * eps).exp(), Regime::NotApplicable)
}

/// Light-tailed CVaR deviation bound, two regimes split at
/// `eps* = (sigma^2 + v_alpha^2) / (b (1-alpha))`; the boundary itself
/// uses the small-eps branch.
pub fn cvar_bound_light(n: u64, eps: f64, params: &LightBoundParams) -> BoundValue {
    let n = n as f64;
    let tail = params.alpha.tail_mass();
    let proxy = params.variance_proxy();
    if eps <= params.epsilon_star() {
        let raw = 6.0 * (-params.c * n * eps * eps * tail * tail / (2.0 * proxy)).exp();
        clip(raw, Regime::SmallEpsilon)
    } else {
        let raw = 2.0 * (-n * eps * tail / (4.0 * params.b)).exp()
            + 6.0 * (-params.c * n * eps * eps * tail * tail).exp();
        clip(raw, Regime::LargeEpsilon)
    }
}

/// Bounded-moment CVaR deviation bound: for p < 2 the exponent carries
/// the power p/(p-1); at p = 2 it is the plain quadratic form.
pub fn cvar_bound_heavy(n: u64, eps: f64, params: &HeavyBoundParams) -> BoundValue {
    let n = n as f64;
    let tail = params.alpha.tail_mass();
    let raw = if params.p < 2.0 {
        let power = params.p / (params.p - 1.0);
        8.0 * (-params.c * n * (tail * eps).powf(power)).exp()
    } else {
        8.0 * (-params.c * n * tail * tail * eps * eps).exp()
    };
    clip(raw, Regime::NotApplicable)
}

/// Single-expression light-tailed bound:
/// `8 exp(-n (1-alpha) min{eps, eps^2} G)`.
pub fn simplified_light_bound(n: u64, eps: f64, alpha: RiskLevel, g: f64) -> BoundValue {
    let raw = 8.0 * (-(n as f64) * alpha.tail_mass() * eps.min(eps * eps) * g).exp();
    clip(raw, Regime::NotApplicable)
}

/// The constant folding the light-tail bound into its simplified form:
/// `G = min{ c(1-alpha) / (2(sigma^2 + v_alpha^2)), 1/(4b), c(1-alpha) }`.
pub fn constant_g(params: &LightBoundParams) -> f64 {
    let tail = params.alpha.tail_mass();
    let term1 = params.c * tail / (2.0 * params.variance_proxy());
    let term2 = 1.0 / (4.0 * params.b);
    let term3 = params.c * tail;
    term1.min(term2).min(term3)
}

/// A bound family together with its constants, for evaluation on a grid
/// or inversion for n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundSpec {
    Var { c: f64 },
    Light(LightBoundParams),
    Heavy(HeavyBoundParams),
    Simplified { alpha: RiskLevel, g: f64 },
}

impl BoundSpec {
    pub fn evaluate(&self, n: u64, eps: f64) -> BoundValue {
        match self {
            BoundSpec::Var { c } => var_bound(n, eps, *c),
            BoundSpec::Light(params) => cvar_bound_light(n, eps, params),
            BoundSpec::Heavy(params) => cvar_bound_heavy(n, eps, params),
            BoundSpec::Simplified { alpha, g } => simplified_light_bound(n, eps, *alpha, *g),
        }
    }

    /// Exponential decay rate in n for fixed eps: the bound is at most
    /// `(leading coefficient) * exp(-rate * n)`. Used to seed inversion.
    fn decay_rate(&self, eps: f64) -> f64 {
        match self {
            BoundSpec::Var { c } => 2.0 * c * eps * eps,
            BoundSpec::Light(p) => {
                let tail = p.alpha.tail_mass();
                if eps <= p.epsilon_star() {
                    p.c * eps * eps * tail * tail / (2.0 * p.variance_proxy())
                } else {
                    // Envelope: both terms decay at least this fast.
                    (eps * tail / (4.0 * p.b)).min(p.c * eps * eps * tail * tail)
                }
            }
            BoundSpec::Heavy(p) => {
                let tail = p.alpha.tail_mass();
                if p.p < 2.0 {
                    p.c * (tail * eps).powf(p.p / (p.p - 1.0))
                } else {
                    p.c * tail * tail * eps * eps
                }
            }
            BoundSpec::Simplified { alpha, g } => alpha.tail_mass() * eps.min(eps * eps) * g,
        }
    }
}

/// Smallest integer n for which `spec.evaluate(n, eps) <= target_delta`.
///
/// Seeds n by inverting the exponential envelope in closed form, then
/// steps to the exact minimum (the round-trip property
/// `bound(n) <= delta < bound(n-1)` is checked directly).
pub fn invert_for_n(eps: f64, target_delta: f64, spec: &BoundSpec) -> Result<u64, BoundsError> {
    if !(target_delta > 0.0) {
        return Err(BoundsError::InvalidTargetDelta(target_delta));
    }
    if target_delta >= 1.0 {
        return Ok(1); // bounds are clipped to 1
    }
    let rate = spec.decay_rate(eps);
    if !(rate > 0.0) {
        return Err(BoundsError::Unachievable { target_delta });
    }
    let coefficient = 8.0f64; // largest leading constant across the forms
    let seed = ((coefficient / target_delta).ln() / rate).ceil().max(1.0);
    let mut hi = if seed.is_finite() { seed as u64 } else { u64::MAX / 2 };

    // The envelope seed can carry floating slack; grow until satisfied.
    while spec.evaluate(hi, eps).probability_bound > target_delta {
        hi = hi
            .checked_mul(2)
            .ok_or(BoundsError::Unachievable { target_delta })?;
        if hi > (1u64 << 62) {
            return Err(BoundsError::Unachievable { target_delta });
        }
    }
    // Bounds are non-increasing in n, so the minimum is found by bisection.
    let mut lo = 1u64;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if spec.evaluate(mid, eps).probability_bound <= target_delta {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn level(alpha: f64) -> RiskLevel {
        RiskLevel::new(alpha).unwrap()
    }

    fn unit_light() -> LightBoundParams {
        // sigma^2 + v_alpha^2 = 1, b = 1, c = 1 at alpha = 0.5.
        LightBoundParams {
            sigma: 1.0,
            b: 1.0,
            v_alpha: 0.0,
            c: 1.0,
            alpha: level(0.5),
        }
    }

    #[test]
    fn var_bound_values() {
        let b = var_bound(100, 0.1, 1.0);
        assert_relative_eq!(b.probability_bound, 2.0 * (-2.0f64).exp(), max_relative = 1e-12);
        assert_eq!(b.regime, Regime::NotApplicable);
        assert_eq!(var_bound(5, 1e-12, 1.0).probability_bound, 1.0);
        assert_eq!(var_bound(1_000_000, 0.1, 1.0).probability_bound, 0.0);
    }

    #[test]
    fn light_bound_small_epsilon_branch() {
        let params = unit_light();
        assert_relative_eq!(params.epsilon_star(), 2.0);
        let b = cvar_bound_light(100, 1.0, &params);
        assert_eq!(b.regime, Regime::SmallEpsilon);
        assert_relative_eq!(
            b.probability_bound,
            6.0 * (-12.5f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn light_bound_large_epsilon_branch() {
        let params = unit_light();
        let b = cvar_bound_light(100, 4.0, &params);
        assert_eq!(b.regime, Regime::LargeEpsilon);
        assert_relative_eq!(
            b.probability_bound,
            2.0 * (-50.0f64).exp() + 6.0 * (-400.0f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn light_bound_boundary_uses_small_branch() {
        let params = unit_light();
        let b = cvar_bound_light(100, params.epsilon_star(), &params);
        assert_eq!(b.regime, Regime::SmallEpsilon);
    }

    #[test]
    fn heavy_bound_values() {
        let p2 = HeavyBoundParams {
            p: 2.0,
            c: 1.0,
            alpha: level(0.5),
        };
        assert_relative_eq!(
            cvar_bound_heavy(100, 0.4, &p2).probability_bound,
            8.0 * (-4.0f64).exp(),
            max_relative = 1e-12
        );
        let p15 = HeavyBoundParams {
            p: 1.5,
            c: 1.0,
            alpha: level(0.5),
        };
        // exponent power p/(p-1) = 3; raw 8 exp(-100 * 0.25^3) > 1 clips.
        assert!(8.0 * (-100.0 * 0.25f64.powi(3)).exp() > 1.0);
        assert_eq!(cvar_bound_heavy(100, 0.5, &p15).probability_bound, 1.0);
        // at four times the samples the same form is below the clip
        assert_relative_eq!(
            cvar_bound_heavy(400, 0.5, &p15).probability_bound,
            8.0 * (-400.0 * 0.25f64.powi(3)).exp(),
            max_relative = 1e-12
        );
        assert_eq!(cvar_bound_heavy(1, 1e-9, &p2).probability_bound, 1.0);
    }

    #[test]
    fn heavy_exponent_continuous_at_p_two() {
        let alpha = level(0.9);
        let near = HeavyBoundParams {
            p: 2.0 - 1e-6,
            c: 0.7,
            alpha,
        };
        let at = HeavyBoundParams {
            p: 2.0,
            c: 0.7,
            alpha,
        };
        for (n, eps) in [(500u64, 0.8), (2000, 1.3), (10_000, 2.0)] {
            let a = cvar_bound_heavy(n, eps, &near).probability_bound;
            let b = cvar_bound_heavy(n, eps, &at).probability_bound;
            if b > 0.0 {
                assert_relative_eq!(a.ln(), b.ln(), max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn simplified_bound_min_selection() {
        let b = simplified_light_bound(100, 1.0, level(0.5), 0.1);
        assert_relative_eq!(b.probability_bound, 8.0 * (-5.0f64).exp(), max_relative = 1e-12);
        // below 1 the quadratic term is smaller
        let lo = simplified_light_bound(1000, 0.5, level(0.5), 0.1);
        assert_relative_eq!(
            lo.probability_bound,
            8.0 * (-1000.0 * 0.5 * 0.25 * 0.1f64).exp(),
            max_relative = 1e-12
        );
        // above 1 the linear term is smaller
        let hi = simplified_light_bound(100, 2.0, level(0.5), 0.1);
        assert_relative_eq!(
            hi.probability_bound,
            8.0 * (-100.0 * 0.5 * 2.0 * 0.1f64).exp(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn constant_g_term_selection() {
        assert_relative_eq!(constant_g(&unit_light()), 0.25);
        let big_b = LightBoundParams {
            b: 1e9,
            ..unit_light()
        };
        assert_relative_eq!(constant_g(&big_b), 2.5e-10);
        let big_c = LightBoundParams {
            c: 1e6,
            ..unit_light()
        };
        assert_relative_eq!(constant_g(&big_c), 0.25); // 1/(4b) dominates
    }

    #[test]
    fn invert_var_bound_example() {
        let spec = BoundSpec::Var { c: 1.0 };
        let delta = 2.0 * (-2.0f64).exp();
        assert_eq!(invert_for_n(0.1, delta, &spec).unwrap(), 100);
    }

    #[test]
    fn invert_simplified_example() {
        let spec = BoundSpec::Simplified {
            alpha: level(0.5),
            g: 0.25,
        };
        let delta = 8.0 * (-5.0f64).exp();
        assert_eq!(invert_for_n(1.0, delta, &spec).unwrap(), 40);
    }

    #[test]
    fn invert_with_loose_target_returns_one() {
        let spec = BoundSpec::Var { c: 1.0 };
        assert_eq!(invert_for_n(0.1, 1.0, &spec).unwrap(), 1);
        assert_eq!(invert_for_n(0.1, 5.0, &spec).unwrap(), 1);
        assert!(invert_for_n(0.1, 0.0, &spec).is_err());
    }

    #[test]
    fn monotone_in_n_and_eps_on_grids() {
        let specs = [
            BoundSpec::Var { c: 0.8 },
            BoundSpec::Light(LightBoundParams {
                sigma: 1.2,
                b: 0.7,
                v_alpha: 1.5,
                c: 0.9,
                alpha: level(0.9),
            }),
            BoundSpec::Heavy(HeavyBoundParams {
                p: 1.5,
                c: 0.5,
                alpha: level(0.9),
            }),
            BoundSpec::Simplified {
                alpha: level(0.9),
                g: 0.3,
            },
        ];
        for spec in specs {
            for eps in [0.05, 0.2, 1.0, 3.0] {
                let mut last = f64::INFINITY;
                for n in [1u64, 10, 100, 1000, 10_000] {
                    let b = spec.evaluate(n, eps).probability_bound;
                    assert!(b <= last + 1e-15, "{spec:?} eps={eps} n={n}");
                    last = b;
                }
            }
            for n in [10u64, 500, 5000] {
                let mut last = f64::INFINITY;
                for k in 1..60 {
                    let eps = 0.05 * k as f64;
                    let b = spec.evaluate(n, eps).probability_bound;
                    assert!(b <= last + 1e-15, "{spec:?} n={n} eps={eps}");
                    last = b;
                }
            }
        }
    }

    #[test]
    fn light_regime_flips_once_on_eps_sweep() {
        let params = LightBoundParams {
            sigma: 1.1,
            b: 0.9,
            v_alpha: 0.8,
            c: 1.3,
            alpha: level(0.95),
        };
        let mut flips = 0;
        let mut last = cvar_bound_light(100, 1e-3, &params).regime;
        for k in 1..=2000 {
            let eps = 1e-3 + k as f64 * 0.05;
            let regime = cvar_bound_light(100, eps, &params).regime;
            if regime != last {
                flips += 1;
                assert_eq!(last, Regime::SmallEpsilon);
                assert_eq!(regime, Regime::LargeEpsilon);
            }
            last = regime;
        }
        assert_eq!(flips, 1);
    }

    proptest! {
        #[test]
        fn invert_round_trips(
            eps in 0.01f64..3.0,
            delta_exp in -12.0f64..-0.5,
            c in 0.05f64..5.0,
            g in 0.01f64..2.0,
            p in 1.1f64..2.0,
            alpha in 0.5f64..0.99,
            sigma in 0.1f64..3.0,
            b in 0.1f64..3.0,
            v_alpha in -2.0f64..3.0,
        ) {
            let delta = 10f64.powf(delta_exp);
            let specs = [
                BoundSpec::Var { c },
                BoundSpec::Light(LightBoundParams { sigma, b, v_alpha, c, alpha: level(alpha) }),
                BoundSpec::Heavy(HeavyBoundParams { p, c, alpha: level(alpha) }),
                BoundSpec::Simplified { alpha: level(alpha), g },
            ];
            for spec in specs {
                let n = invert_for_n(eps, delta, &spec).unwrap();
                prop_assert!(spec.evaluate(n, eps).probability_bound <= delta);
                if n > 1 {
                    prop_assert!(spec.evaluate(n - 1, eps).probability_bound > delta);
                }
            }
        }
    }
}
