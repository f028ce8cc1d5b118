//! Closed forms available under quadratic utility.
//!
//! With `u(c) = αc - βc²/2` expected utility depends on the noise only
//! through its variance, and the FOC is affine in `θ`. Writing `x = y - ā`,
//!
//! ```text
//! θ̂(x) = A'x / (x² + σ²) - C,   k = α/β - ((A + ā)ω - R),
//! A' = kā/R,                     C = (āω - R)/R.
//! ```
//!
//! Level sets `θ̂ = ℓ` solve `(C+ℓ)x² - A'x + (C+ℓ)σ² = 0`, which gives the
//! ICL-only boundary (`ℓ = 0`), the CML-only boundary (`ℓ = 1`) and the
//! ICL/CML indifference signal (`ℓ = ½`).

use serde::Serialize;

use super::{ChoiceContext, ShareChoice};
use crate::economy::UtilitySpec;
use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticConstants {
    /// `k = α/β - ((A + ā)ω - R)`.
    pub k: f64,
    /// `A' = kā/R`.
    pub a_prime: f64,
    /// `C = (āω - R)/R`.
    pub c: f64,
}

/// Signals `ā + x` with `θ̂(x) = level`, i.e. the real roots of
/// `x = b ± √(b² - σ²)` with `b = A' / (2(C + level))`.
///
/// Returns both roots in ascending order (equal when the discriminant is
/// zero) or an empty vector when there is no real root.
pub fn level_set_roots(pool_mean: f64, a_prime: f64, c_plus_level: f64, sigma: f64) -> Vec<f64> {
    if c_plus_level <= 0.0 {
        return Vec::new();
    }
    let b = a_prime / (2.0 * c_plus_level);
    let disc = b * b - sigma * sigma;
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    vec![pool_mean + b - s, pool_mean + b + s]
}

impl ChoiceContext<'_> {
    pub fn quadratic_constants(&self) -> Result<QuadraticConstants> {
        let UtilitySpec::Quadratic { alpha, beta } = *self.params.utility() else {
            return Err(ModelError::WrongUtility {
                expected: "quadratic",
            });
        };
        let r = self.params.interest_rate();
        let a_bar = self.pool_mean();
        let w = self.wage();
        let k = alpha / beta - ((self.params.basic_capital() + a_bar) * w - r);
        Ok(QuadraticConstants {
            k,
            a_prime: k * a_bar / r,
            c: (a_bar * w - r) / r,
        })
    }

    /// Closed-form CML share. `raw` is the unconstrained optimum, `theta`
    /// its projection on `[0, 1]`.
    pub fn optimal_share_quadratic(&self, y: f64) -> Result<ShareChoice> {
        let q = self.quadratic_constants()?;
        let x = y - self.pool_mean();
        if x > 0.0 && q.k <= 0.0 {
            return Err(ModelError::AssumptionViolated(format!(
                "the closed form requires k > 0 for y > a-bar, got k = {} at y = {y}",
                q.k
            )));
        }
        let variance = self.params.noise().variance();
        let pull = if x == 0.0 {
            0.0
        } else {
            q.a_prime * x / (x * x + variance)
        };
        let raw = pull - q.c;
        Ok(ShareChoice {
            theta: raw.clamp(0.0, 1.0),
            raw: Some(raw),
        })
    }

    /// Indifference signals `ŷ` from the `θ̂ = ½` level set.
    pub fn indifference_signals_quadratic(&self) -> Result<Vec<f64>> {
        let q = self.quadratic_constants()?;
        Ok(level_set_roots(
            self.pool_mean(),
            q.a_prime,
            q.c + 0.5,
            self.params.noise().sigma,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{EconomyParams, NoiseSpec, ProductionSpec, SignalGrid};

    fn params(sigma: f64) -> EconomyParams {
        EconomyParams::new(
            1.2,
            2.0,
            SignalGrid::uniform(1.0, 2.2, 25).unwrap(),
            NoiseSpec::two_point(sigma),
            UtilitySpec::Quadratic {
                alpha: 4.0,
                beta: 0.5,
            },
            ProductionSpec::DirectWage { wage: 1.5 },
        )
        .unwrap()
    }

    #[test]
    fn share_at_pool_mean_is_negative_constant() {
        let p = params(0.9);
        let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
        let q = ctx.quadratic_constants().unwrap();
        let s = ctx.optimal_share_quadratic(1.3).unwrap();
        assert_eq!(s.raw.unwrap(), -q.c);
        assert!((q.c - (1.3 * 1.5 - 1.2) / 1.2).abs() < 1e-15);
        assert_eq!(s.theta, 0.0);
    }

    #[test]
    fn peak_one_sigma_above_pool_mean() {
        let p = params(0.3);
        let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
        let q = ctx.quadratic_constants().unwrap();
        let peak = ctx.optimal_share_quadratic(1.3 + 0.3).unwrap().raw.unwrap();
        let expected = q.k * 1.3 / (2.0 * 1.2 * 0.3) - (1.3 * 1.5 - 1.2) / 1.2;
        assert!((peak - expected).abs() < 1e-12);
        for dy in [0.25, 0.29, 0.31, 0.4] {
            let v = ctx.optimal_share_quadratic(1.3 + dy).unwrap().raw.unwrap();
            assert!(v < peak);
        }
    }

    #[test]
    fn matches_numeric_foc() {
        let p = params(0.9);
        for a_bar in [1.15, 1.3, 1.6] {
            let ctx = ChoiceContext::new(&p, a_bar, 1.5).unwrap();
            for y in p.grid().signals() {
                let closed = ctx.optimal_share_quadratic(y).unwrap();
                let numeric = ctx.optimal_share(y).unwrap();
                assert!((closed.theta - numeric.theta).abs() <= 1e-8);
                let (r1, r2) = (closed.raw.unwrap(), numeric.raw.unwrap());
                assert!((r1 - r2).abs() <= 1e-8 * r1.abs().max(1.0));
            }
        }
    }

    #[test]
    fn nonpositive_k_above_pool_mean_is_an_error() {
        // α/β barely above consumption at the pool mean gives k <= 0.
        let p = EconomyParams::new(
            1.2,
            2.0,
            SignalGrid::uniform(1.0, 2.2, 5).unwrap(),
            NoiseSpec::two_point(0.0),
            UtilitySpec::Quadratic {
                alpha: 3.7,
                beta: 1.0,
            },
            ProductionSpec::DirectWage { wage: 1.5 },
        )
        .unwrap();
        let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
        assert!(ctx.quadratic_constants().unwrap().k <= 0.0);
        assert!(matches!(
            ctx.optimal_share_quadratic(1.6),
            Err(ModelError::AssumptionViolated(_))
        ));
    }

    #[test]
    fn wrong_family_is_rejected() {
        let p = params(0.9)
            .with_utility(UtilitySpec::Cara { lambda: 0.5 })
            .unwrap();
        let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
        assert!(matches!(
            ctx.optimal_share_quadratic(1.6),
            Err(ModelError::WrongUtility { .. })
        ));
    }

    #[test]
    fn repeated_root_when_discriminant_vanishes() {
        let (a_bar, a_prime, c) = (1.3, 5.0, 1.1);
        let b = a_prime / (2.0 * (c + 1.0));
        let roots = level_set_roots(a_bar, a_prime, c + 1.0, b);
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0], roots[1]);
        assert!((roots[0] - (a_bar + b)).abs() < 1e-15);
        assert!(level_set_roots(a_bar, a_prime, c + 1.0, b * 1.001).is_empty());
    }

    #[test]
    fn lower_root_collapses_to_pool_mean_without_noise() {
        let (a_bar, a_prime, c) = (1.3, 5.0, 1.1);
        let mut prev = f64::INFINITY;
        for sigma in [0.3, 0.1, 0.01, 1e-4, 1e-6] {
            let lower = level_set_roots(a_bar, a_prime, c, sigma)[0];
            assert!(lower - a_bar < prev);
            prev = lower - a_bar;
        }
        assert!(prev < 1e-10);
    }
}
