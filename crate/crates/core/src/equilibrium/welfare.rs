use serde::Serialize;

use super::{solve_fixed_point_with, Equilibrium, Regime, SolverOptions};
use crate::choice::{level_set_roots, ChoiceContext};
use crate::economy::EconomyParams;
use crate::error::Result;

/// Relative tolerance on expected-utility differences.
pub const WELFARE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeVerdict {
    Better,
    Equal,
    Worse,
}

/// Whether the configuration lies inside the hypotheses under which the
/// portfolio regime is known to Pareto dominate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceScope {
    pub in_scope: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WelfareReport {
    pub portfolio: Equilibrium,
    pub funding_diversity: Equilibrium,
    /// `ā_PR - ā_FDE`.
    pub delta_pool_mean: f64,
    pub signals: Vec<f64>,
    pub eu_portfolio: Vec<f64>,
    pub eu_funding_diversity: Vec<f64>,
    pub verdicts: Vec<NodeVerdict>,
    /// Every node weakly better under PR and at least one strictly.
    pub pareto: bool,
    pub scope: DominanceScope,
}

impl WelfareReport {
    /// Nodes that hold ICL only in both regimes.
    pub fn icl_only_in_both(&self) -> Vec<usize> {
        (0..self.signals.len())
            .filter(|&i| {
                self.portfolio.profile.theta[i] == 0.0
                    && self.funding_diversity.profile.theta[i] == 0.0
            })
            .collect()
    }

    /// Nodes that hold CML only in both regimes.
    pub fn cml_only_in_both(&self) -> Vec<usize> {
        (0..self.signals.len())
            .filter(|&i| {
                self.portfolio.profile.theta[i] == 1.0
                    && self.funding_diversity.profile.theta[i] == 1.0
            })
            .collect()
    }
}

fn scope(params: &EconomyParams, fde: &Equilibrium) -> DominanceScope {
    let out = |reason: String| DominanceScope {
        in_scope: false,
        reason,
    };
    if fde.sets.cml_only.is_empty() {
        return out("every group holds ICL under FDE; no adverse selection to undo".into());
    }
    if fde.pool_mean * fde.wage <= params.interest_rate() {
        return out("a-bar * omega <= R at the FDE pool mean".into());
    }
    if !params.utility().is_quadratic() {
        return DominanceScope {
            in_scope: true,
            reason: format!("{} utility", params.utility().family_name()),
        };
    }
    let Ok(ctx) = ChoiceContext::new(params, fde.pool_mean, fde.wage) else {
        return out("invalid FDE terms".into());
    };
    let Ok(q) = ctx.quadratic_constants() else {
        return out("quadratic constants unavailable".into());
    };
    let roots = level_set_roots(fde.pool_mean, q.a_prime, q.c + 0.5, params.noise().sigma);
    let top = params.grid().upper();
    match roots.as_slice() {
        [_, upper] if top <= *upper => DominanceScope {
            in_scope: true,
            reason: format!("quadratic utility with y2 = {top} <= upper indifference signal {upper}"),
        },
        [_, upper] => out(format!(
            "quadratic utility with y2 = {top} above upper indifference signal {upper}"
        )),
        _ => out("quadratic utility without indifference signals".into()),
    }
}

/// Solves both regimes and compares expected utilities group by group,
/// each at its own regime's pool mean and shares.
pub fn compare_regimes(params: &EconomyParams, options: &SolverOptions) -> Result<WelfareReport> {
    let pr = solve_fixed_point_with(Regime::Portfolio, params, options)?;
    let fde = solve_fixed_point_with(Regime::FundingDiversity, params, options)?;
    let pr_ctx = ChoiceContext::new(params, pr.pool_mean, pr.wage)?;
    let fde_ctx = ChoiceContext::new(params, fde.pool_mean, fde.wage)?;

    let signals: Vec<f64> = params.grid().signals().collect();
    let mut eu_pr = Vec::with_capacity(signals.len());
    let mut eu_fde = Vec::with_capacity(signals.len());
    let mut verdicts = Vec::with_capacity(signals.len());
    for (i, &y) in signals.iter().enumerate() {
        let a = pr_ctx.expected_utility(y, pr.profile.theta[i])?;
        let b = fde_ctx.expected_utility(y, fde.profile.theta[i])?;
        let tol = WELFARE_TOLERANCE * a.abs().max(b.abs()).max(1.0);
        verdicts.push(if a - b > tol {
            NodeVerdict::Better
        } else if b - a > tol {
            NodeVerdict::Worse
        } else {
            NodeVerdict::Equal
        });
        eu_pr.push(a);
        eu_fde.push(b);
    }
    let pareto = verdicts.iter().all(|v| *v != NodeVerdict::Worse)
        && verdicts.contains(&NodeVerdict::Better);
    let scope = scope(params, &fde);
    Ok(WelfareReport {
        delta_pool_mean: pr.pool_mean - fde.pool_mean,
        portfolio: pr,
        funding_diversity: fde,
        signals,
        eu_portfolio: eu_pr,
        eu_funding_diversity: eu_fde,
        verdicts,
        pareto,
        scope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{NoiseSpec, ProductionSpec, SignalGrid, UtilitySpec};

    fn params(utility: UtilitySpec) -> EconomyParams {
        EconomyParams::new(
            1.2,
            2.0,
            SignalGrid::uniform(1.0, 2.2, 121).unwrap(),
            NoiseSpec::two_point(0.9),
            utility,
            ProductionSpec::DirectWage { wage: 1.5 },
        )
        .unwrap()
    }

    #[test]
    fn cml_only_groups_are_indifferent() {
        let p = params(UtilitySpec::Cara { lambda: 0.5 });
        let report = compare_regimes(&p, &SolverOptions::default()).unwrap();
        let both = report.cml_only_in_both();
        assert!(!both.is_empty());
        for i in both {
            assert_eq!(report.eu_portfolio[i], report.eu_funding_diversity[i]);
            assert_eq!(report.verdicts[i], NodeVerdict::Equal);
        }
    }

    #[test]
    fn icl_only_groups_gain_with_higher_pool_mean() {
        let p = params(UtilitySpec::Cara { lambda: 0.5 });
        let report = compare_regimes(&p, &SolverOptions::default()).unwrap();
        assert!(report.delta_pool_mean > 0.0);
        for i in report.icl_only_in_both() {
            assert_eq!(report.verdicts[i], NodeVerdict::Better);
        }
        assert!(report.scope.in_scope);
    }

    #[test]
    fn everyone_in_icl_is_out_of_scope() {
        // Noise and risk aversion high enough that no group takes CML.
        let p = EconomyParams::new(
            1.2,
            2.0,
            SignalGrid::uniform(1.0, 1.2, 5).unwrap(),
            NoiseSpec::two_point(0.95),
            UtilitySpec::Cara { lambda: 3.0 },
            ProductionSpec::DirectWage { wage: 1.5 },
        )
        .unwrap();
        let report = compare_regimes(&p, &SolverOptions::default()).unwrap();
        assert!(report.funding_diversity.sets.cml_only.is_empty());
        assert!(!report.scope.in_scope);
    }
}
