use serde::Serialize;

use super::Equilibrium;
use crate::choice::{indifference_signals, level_set_roots, ChoiceContext};
use crate::economy::EconomyParams;
use crate::error::Result;

/// One condition evaluated at an equilibrium. `margin` is signed: positive
/// means the condition holds with room to spare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    pub applicable: bool,
    pub holds: bool,
    pub margin: Option<f64>,
}

impl Condition {
    fn from_margin(margin: f64, strict: bool) -> Self {
        Condition {
            applicable: true,
            holds: if strict { margin > 0.0 } else { margin >= 0.0 },
            margin: Some(margin),
        }
    }

    fn not_applicable() -> Self {
        Condition {
            applicable: false,
            holds: false,
            margin: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub pool_mean: f64,
    /// Some indifference signal lies strictly inside `(y¹, y²)`; margin is
    /// its distance to the nearer bound.
    pub indifference_interior: Condition,
    /// `āω > R`; margin `āω - R`.
    pub wage_exceeds_rate: Condition,
    /// Quadratic only: `k > 0`.
    pub positive_k: Condition,
    /// Quadratic only: `σ² < (kā / (2(āω - R)))²`.
    pub portfolio_noise: Condition,
    /// `A'² - 4σ²C²`, the discriminant form of `portfolio_noise`.
    pub portfolio_discriminant: Option<f64>,
    /// Quadratic only: `σ² ≤ (k / 2ω)²`.
    pub cml_noise: Condition,
    /// `A'² - 4σ²(C+1)²`, the discriminant form of `cml_noise`.
    pub cml_discriminant: Option<f64>,
    /// Quadratic only: `y² ≥ y''₁`; margin `y² - y''₁`.
    pub cml_support: Condition,
    /// False when `āω ≤ R`: results that rely on it do not apply.
    pub supported: bool,
}

impl AssumptionReport {
    /// Both parts of the condition guaranteeing all three sets.
    pub fn all_sets_condition(&self) -> bool {
        self.cml_noise.holds && self.cml_support.holds
    }
}

/// Evaluates the model's standing assumptions at the equilibrium pool mean.
/// Never fails on a violated assumption; only evaluation errors propagate.
pub fn assumption_checks(eq: &Equilibrium, params: &EconomyParams) -> Result<AssumptionReport> {
    let a_bar = eq.pool_mean;
    let w = eq.wage;
    let r = params.interest_rate();
    let grid = params.grid();
    let (y1, y2) = (grid.lower(), grid.upper());
    let ctx = ChoiceContext::new(params, a_bar, w)?;

    let roots = indifference_signals(&ctx)?;
    let indifference_interior = roots
        .iter()
        .copied()
        .filter(|&y| y > y1 && y < y2)
        .map(|y| (y - y1).min(y2 - y))
        .fold(None, |best: Option<f64>, m| Some(best.map_or(m, |b| b.max(m))))
        .map_or(
            Condition {
                applicable: true,
                holds: false,
                margin: None,
            },
            |m| Condition::from_margin(m, true),
        );
    let wage_exceeds_rate = Condition::from_margin(a_bar * w - r, true);

    let variance = params.noise().variance();
    let sigma = params.noise().sigma;
    let mut report = AssumptionReport {
        pool_mean: a_bar,
        indifference_interior,
        wage_exceeds_rate,
        positive_k: Condition::not_applicable(),
        portfolio_noise: Condition::not_applicable(),
        portfolio_discriminant: None,
        cml_noise: Condition::not_applicable(),
        cml_discriminant: None,
        cml_support: Condition::not_applicable(),
        supported: wage_exceeds_rate.holds,
    };
    if let Ok(q) = ctx.quadratic_constants() {
        report.positive_k = Condition::from_margin(q.k, true);
        let bound3 = q.k * a_bar / (2.0 * (a_bar * w - r));
        report.portfolio_noise = Condition::from_margin(bound3 * bound3 - variance, true);
        report.portfolio_discriminant = Some(q.a_prime * q.a_prime - 4.0 * variance * q.c * q.c);
        let bound4 = q.k / (2.0 * w);
        report.cml_noise = Condition::from_margin(bound4 * bound4 - variance, false);
        report.cml_discriminant =
            Some(q.a_prime * q.a_prime - 4.0 * variance * (q.c + 1.0) * (q.c + 1.0));
        let cml_roots = level_set_roots(a_bar, q.a_prime, q.c + 1.0, sigma);
        report.cml_support = match cml_roots.first() {
            Some(&lower) => Condition::from_margin(y2 - lower, false),
            None => Condition {
                applicable: true,
                holds: false,
                margin: None,
            },
        };
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{NoiseSpec, ProductionSpec, SignalGrid, UtilitySpec};
    use crate::equilibrium::{solve_fixed_point, Regime};

    fn params(sigma: f64, basic: f64) -> EconomyParams {
        EconomyParams::new(
            1.2,
            basic,
            SignalGrid::uniform(1.0, 2.2, 61).unwrap(),
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
    fn margins_match_discriminants_up_to_scaling() {
        let p = params(0.9, 2.0);
        let eq = solve_fixed_point(Regime::Portfolio, &p).unwrap();
        let rep = assumption_checks(&eq, &p).unwrap();
        let ctx = ChoiceContext::new(&p, eq.pool_mean, eq.wage).unwrap();
        let q = ctx.quadratic_constants().unwrap();
        let m3 = rep.portfolio_noise.margin.unwrap();
        let d3 = rep.portfolio_discriminant.unwrap();
        assert!((m3 * 4.0 * q.c * q.c - d3).abs() <= 1e-12 * d3.abs().max(1.0));
        let m4 = rep.cml_noise.margin.unwrap();
        let d4 = rep.cml_discriminant.unwrap();
        let s = 4.0 * (q.c + 1.0) * (q.c + 1.0);
        assert!((m4 * s - d4).abs() <= 1e-12 * d4.abs().max(1.0));
        assert!(rep.supported && rep.positive_k.holds);
    }

    #[test]
    fn zero_noise_has_maximal_margins() {
        let p = params(0.0, 2.0);
        let eq = solve_fixed_point(Regime::Portfolio, &p).unwrap();
        let rep = assumption_checks(&eq, &p).unwrap();
        let ctx = ChoiceContext::new(&p, eq.pool_mean, eq.wage).unwrap();
        let q = ctx.quadratic_constants().unwrap();
        assert!(rep.portfolio_noise.holds && rep.cml_noise.holds);
        let bound4 = q.k / (2.0 * eq.wage);
        assert_eq!(rep.cml_noise.margin.unwrap(), bound4 * bound4);
    }

    #[test]
    fn low_wage_is_flagged_unsupported() {
        let p = params(0.3, 2.0)
            .with_production(ProductionSpec::DirectWage { wage: 0.5 })
            .unwrap();
        let eq = solve_fixed_point(Regime::Portfolio, &p).unwrap();
        let rep = assumption_checks(&eq, &p).unwrap();
        assert!(eq.pool_mean * 0.5 <= 1.2);
        assert!(!rep.wage_exceeds_rate.holds);
        assert!(!rep.supported);
    }

    #[test]
    fn non_quadratic_skips_quadratic_conditions() {
        let p = params(0.9, 2.0)
            .with_utility(UtilitySpec::Crra { gamma: 2.0 })
            .unwrap();
        let eq = solve_fixed_point(Regime::Portfolio, &p).unwrap();
        let rep = assumption_checks(&eq, &p).unwrap();
        assert!(!rep.positive_k.applicable && !rep.cml_noise.applicable);
        assert!(rep.portfolio_discriminant.is_none());
        assert!(rep.indifference_interior.holds);
    }
}
