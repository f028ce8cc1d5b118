//! Break-even fixed point for the ICL pool mean under both regimes.

mod assumptions;
mod sweep;
mod welfare;

pub use assumptions::{assumption_checks, AssumptionReport, Condition};
pub use sweep::{comparative_static_sweep, Sweep, SweepOutcome, SweepParam, SweepPoint};
pub use welfare::{compare_regimes, NodeVerdict, DominanceScope, WelfareReport};

use rayon::prelude::*;
use serde::Serialize;

use crate::choice::{
    classify_sets, cutoff_report, ChoiceContext, CutoffReport, SetPartition, ShareChoice,
    ThetaProfile,
};
use crate::economy::{EconomyParams, SignalGrid, Utility};
use crate::error::{ModelError, Result};

/// Smallest ICL participation `Σ w(1-θ)` accepted by [`pool_mean`].
pub const MIN_ICL_MASS: f64 = 1e-12;
/// Largest accepted `|ā - T(ā)|` and `|break-even residual|` at a solution.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Number of starting points used by [`probe_fixed_points`].
pub const PROBE_STARTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// Any mix `θ ∈ [0, 1]`.
    #[serde(rename = "PR")]
    Portfolio,
    /// One channel only, `θ ∈ {0, 1}`.
    #[serde(rename = "FDE")]
    FundingDiversity,
}

impl Regime {
    pub fn short_name(self) -> &'static str {
        match self {
            Regime::Portfolio => "PR",
            Regime::FundingDiversity => "FDE",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Weight `λ` on the mapped value in `ā ← (1-λ)ā + λT(ā)`.
    pub damping: f64,
    /// Stop once `|Δā| ≤ tolerance · ā₀`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Consecutive sign flips of `T(ā) - ā` that trigger halving `λ`.
    pub oscillation_limit: usize,
    /// Starting pool mean; the unconditional mean ability when `None`.
    pub start: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            damping: 0.5,
            tolerance: 1e-12,
            max_iterations: 10_000,
            oscillation_limit: 3,
            start: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(ModelError::invalid(
                "solver.damping",
                format!("must lie in (0, 1], got {}", self.damping),
            ));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(ModelError::invalid("solver.tol", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(ModelError::invalid("solver.max_iter", "must be at least 1"));
        }
        if let Some(start) = self.start {
            if !(start.is_finite() && start > 0.0) {
                return Err(ModelError::invalid(
                    "solver.start",
                    format!("must be positive, got {start}"),
                ));
            }
        }
        Ok(())
    }
}

/// One step of the damped iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pool_mean: f64,
    /// `T(ā)`: pool mean implied by the choices at `pool_mean`.
    pub mapped: f64,
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub regime: Regime,
    pub pool_mean: f64,
    pub wage: f64,
    pub capital: f64,
    pub human_capital: f64,
    pub profile: ThetaProfile,
    pub cutoffs: CutoffReport,
    pub sets: SetPartition,
    /// `|ā - T(ā)|`.
    pub fixed_point_residual: f64,
    pub break_even_residual: f64,
    pub initial_pool_mean: f64,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

/// `ā = Σ w(1-θ)y / Σ w(1-θ)`.
pub fn pool_mean(profile: &ThetaProfile, grid: &SignalGrid) -> Result<f64> {
    if profile.len() != grid.len() {
        return Err(ModelError::invalid(
            "profile",
            format!(
                "length {} does not match grid length {}",
                profile.len(),
                grid.len()
            ),
        ));
    }
    let mut mass = 0.0;
    let mut weighted = 0.0;
    for (node, &theta) in grid.nodes().iter().zip(&profile.theta) {
        let w = node.weight * (1.0 - theta);
        mass += w;
        weighted += w * node.y;
    }
    if mass <= MIN_ICL_MASS {
        return Err(ModelError::DegeneratePool);
    }
    Ok(weighted / mass)
}

/// `Σ w(θR + (1-θ)Ry/ā) - R`, evaluated as `Σ w(1-θ)R(y/ā - 1)` so that
/// an all-CML profile gives exactly zero.
pub fn break_even_residual(eq: &Equilibrium, params: &EconomyParams) -> f64 {
    residual_at(&eq.profile, params, eq.pool_mean)
}

fn residual_at(profile: &ThetaProfile, params: &EconomyParams, a_bar: f64) -> f64 {
    let r = params.interest_rate();
    params
        .grid()
        .nodes()
        .iter()
        .zip(&profile.theta)
        .map(|(node, &theta)| node.weight * (1.0 - theta) * r * (node.y / a_bar - 1.0))
        .sum()
}

/// Choices of every signal group at pool mean `ctx.pool_mean()`.
pub fn choice_profile(regime: Regime, ctx: &ChoiceContext) -> Result<ThetaProfile> {
    let nodes = ctx.params().grid().nodes();
    let choices = nodes
        .par_iter()
        .map(|node| match regime {
            Regime::Portfolio => ctx.optimal_share(node.y),
            Regime::FundingDiversity => ctx.binary_choice(node.y).map(|theta| ShareChoice {
                theta,
                raw: None,
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaProfile::from_choices(&choices))
}

pub fn solve_fixed_point(regime: Regime, params: &EconomyParams) -> Result<Equilibrium> {
    solve_fixed_point_with(regime, params, &SolverOptions::default())
}

pub fn solve_fixed_point_with(
    regime: Regime,
    params: &EconomyParams,
    options: &SolverOptions,
) -> Result<Equilibrium> {
    solve_with_utility(regime, params, options, params.utility())
}

/// Solves the fixed point with choices made under `utility` instead of the
/// scenario's own (used to check invariance to utility rescaling).
pub fn solve_with_utility(
    regime: Regime,
    params: &EconomyParams,
    options: &SolverOptions,
    utility: &dyn Utility,
) -> Result<Equilibrium> {
    options.validate()?;
    let production = params.solve_production()?;
    let wage = production.wage;
    let grid = params.grid();
    let start = options.start.unwrap_or_else(|| grid.mean());
    let tolerance = options.tolerance * start;

    let map = |a_bar: f64| -> Result<(ThetaProfile, f64)> {
        let ctx = ChoiceContext::new(params, a_bar, wage)?.with_utility(utility);
        let profile = choice_profile(regime, &ctx)?;
        let mapped = pool_mean(&profile, grid)?;
        Ok((profile, mapped))
    };

    let mut a_bar = start;
    let mut damping = options.damping;
    let mut trace = Vec::new();
    let mut flips = 0;
    let mut last_sign = 0.0_f64;
    let mut converged = false;
    for iteration in 0..options.max_iterations {
        let (_, mapped) = map(a_bar)?;
        trace.push(IterationRecord {
            iteration,
            pool_mean: a_bar,
            mapped,
            damping,
        });
        let gap = mapped - a_bar;
        let sign = if gap == 0.0 { 0.0 } else { gap.signum() };
        if sign != 0.0 && last_sign != 0.0 && sign != last_sign {
            flips += 1;
            if flips >= options.oscillation_limit {
                damping *= 0.5;
                flips = 0;
            }
        } else {
            flips = 0;
        }
        last_sign = sign;
        let step = damping * gap;
        a_bar += step;
        if step.abs() <= tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ModelError::NonConvergence {
            iterations: options.max_iterations,
            last: a_bar,
            trace,
        });
    }

    // Undamped polishing steps. Under FDE the map is locally constant, so
    // one step lands on the fixed point exactly.
    let (mut profile, mut mapped) = map(a_bar)?;
    for _ in 0..3 {
        if mapped == a_bar {
            break;
        }
        let (next_profile, next_mapped) = map(mapped)?;
        if (next_mapped - mapped).abs() > (mapped - a_bar).abs() {
            break;
        }
        a_bar = mapped;
        profile = next_profile;
        mapped = next_mapped;
    }
    let fixed_point_residual = (a_bar - mapped).abs();
    let break_even = residual_at(&profile, params, a_bar);
    if fixed_point_residual > RESIDUAL_TOLERANCE || break_even.abs() > RESIDUAL_TOLERANCE {
        return Err(ModelError::Stalled {
            pool_mean: a_bar,
            fixed_point_residual,
            break_even_residual: break_even,
        });
    }
    let (lo, hi) = (grid.nodes()[0].y, grid.nodes()[grid.len() - 1].y);
    if a_bar < lo || a_bar > hi {
        return Err(ModelError::Internal(format!(
            "pool mean {a_bar} outside the signal range [{lo}, {hi}]"
        )));
    }
    let ctx = ChoiceContext::new(params, a_bar, wage)?.with_utility(utility);
    let cutoffs = cutoff_report(&ctx)?;
    let sets = classify_sets(&profile, grid)?;
    Ok(Equilibrium {
        regime,
        pool_mean: a_bar,
        wage,
        capital: production.capital,
        human_capital: params.human_capital_stock(),
        profile,
        cutoffs,
        sets,
        fixed_point_residual,
        break_even_residual: break_even,
        initial_pool_mean: start,
        iterations: trace.len(),
        trace,
    })
}

/// Solutions reached from [`PROBE_STARTS`] starts spread evenly over
/// `[y¹, y²]`, with pool means closer than `1e-9` merged.
pub fn probe_fixed_points(
    regime: Regime,
    params: &EconomyParams,
    options: &SolverOptions,
) -> Result<Vec<Equilibrium>> {
    let grid = params.grid();
    let (lo, hi) = (grid.lower(), grid.upper());
    let mut found: Vec<Equilibrium> = Vec::new();
    for i in 0..PROBE_STARTS {
        let start = lo + (hi - lo) * i as f64 / (PROBE_STARTS - 1) as f64;
        let opts = SolverOptions {
            start: Some(start),
            ..*options
        };
        let eq = solve_fixed_point_with(regime, params, &opts)?;
        if !found
            .iter()
            .any(|f| (f.pool_mean - eq.pool_mean).abs() <= 1e-9)
        {
            found.push(eq);
        }
    }
    found.sort_by(|a, b| a.pool_mean.total_cmp(&b.pool_mean));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{NoiseSpec, ProductionSpec, Scaled, UtilitySpec};

    fn params(utility: UtilitySpec, sigma: f64, nodes: usize) -> EconomyParams {
        EconomyParams::new(
            1.2,
            2.0,
            SignalGrid::uniform(1.0, 2.2, nodes).unwrap(),
            NoiseSpec::two_point(sigma),
            utility,
            ProductionSpec::DirectWage { wage: 1.5 },
        )
        .unwrap()
    }

    fn profile(theta: Vec<f64>) -> ThetaProfile {
        ThetaProfile { theta, raw: None }
    }

    #[test]
    fn pool_mean_examples() {
        let grid = SignalGrid::uniform(1.0, 3.0, 5).unwrap();
        let all_icl = pool_mean(&profile(vec![0.0; 5]), &grid).unwrap();
        assert!((all_icl - grid.mean()).abs() < 1e-15);

        let single = SignalGrid::from_points(&[(2.0, 1.0)]).unwrap();
        assert_eq!(pool_mean(&profile(vec![0.7]), &single).unwrap(), 2.0);

        let two = SignalGrid::from_points(&[(1.0, 0.5), (3.0, 0.5)]).unwrap();
        let a = pool_mean(&profile(vec![0.5, 0.0]), &two).unwrap();
        assert!((a - 7.0 / 3.0).abs() < 1e-15);

        assert_eq!(
            pool_mean(&profile(vec![1.0, 1.0]), &two),
            Err(ModelError::DegeneratePool)
        );
    }

    #[test]
    fn residual_trivial_cases() {
        let p = params(UtilitySpec::Cara { lambda: 0.5 }, 0.9, 5);
        assert_eq!(residual_at(&profile(vec![1.0; 5]), &p, 1.4), 0.0);
        let mean = p.grid().mean();
        assert!(residual_at(&profile(vec![0.0; 5]), &p, mean).abs() < 1e-15);
    }

    #[test]
    fn all_icl_converges_immediately() {
        // Without noise every group at or below the mean is ICL-only, and a
        // single-node grid has nobody above it.
        let p = EconomyParams::new(
            1.2,
            2.0,
            SignalGrid::from_points(&[(1.6, 1.0)]).unwrap(),
            NoiseSpec::two_point(0.5),
            UtilitySpec::Crra { gamma: 2.0 },
            ProductionSpec::DirectWage { wage: 1.5 },
        )
        .unwrap();
        let eq = solve_fixed_point(Regime::Portfolio, &p).unwrap();
        assert_eq!(eq.pool_mean, 1.6);
        assert!(eq.iterations <= 2);
        assert_eq!(eq.profile.theta, vec![0.0]);
    }

    #[test]
    fn converged_residuals_are_small() {
        for u in [
            UtilitySpec::Crra { gamma: 2.0 },
            UtilitySpec::Cara { lambda: 0.5 },
            UtilitySpec::Quadratic {
                alpha: 4.0,
                beta: 0.5,
            },
        ] {
            let p = params(u, 0.9, 41);
            for regime in [Regime::Portfolio, Regime::FundingDiversity] {
                let eq = solve_fixed_point(regime, &p).unwrap();
                let mapped = pool_mean(&eq.profile, p.grid()).unwrap();
                assert!((eq.pool_mean - mapped).abs() <= 1e-12 * eq.initial_pool_mean * 2.0);
                assert!(break_even_residual(&eq, &p).abs() <= RESIDUAL_TOLERANCE);
                assert!(eq.pool_mean >= 1.0 && eq.pool_mean <= 2.2);
                if regime == Regime::FundingDiversity {
                    assert!(eq.profile.theta.iter().all(|&t| t == 0.0 || t == 1.0));
                }
            }
        }
    }

    #[test]
    fn fde_pool_is_mean_of_icl_nodes() {
        let p = params(UtilitySpec::Crra { gamma: 2.0 }, 0.9, 41);
        let eq = solve_fixed_point(Regime::FundingDiversity, &p).unwrap();
        let icl: Vec<f64> = p
            .grid()
            .nodes()
            .iter()
            .zip(&eq.profile.theta)
            .filter(|(_, &t)| t == 0.0)
            .map(|(n, _)| n.y)
            .collect();
        let mean = icl.iter().sum::<f64>() / icl.len() as f64;
        assert!((eq.pool_mean - mean).abs() <= 1e-12);
    }

    #[test]
    fn multi_start_agrees() {
        let p = params(UtilitySpec::Cara { lambda: 0.5 }, 0.9, 41);
        let found = probe_fixed_points(Regime::Portfolio, &p, &SolverOptions::default()).unwrap();
        assert_eq!(found.len(), 1);
    }

    #[test]
    fn iteration_limit_reports_trace() {
        let p = params(UtilitySpec::Crra { gamma: 2.0 }, 0.9, 41);
        let opts = SolverOptions {
            max_iterations: 3,
            ..SolverOptions::default()
        };
        match solve_fixed_point_with(Regime::Portfolio, &p, &opts) {
            Err(ModelError::NonConvergence { iterations, trace, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(trace.len(), 3);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rescaled_crra_gives_same_equilibrium() {
        let p = params(UtilitySpec::Crra { gamma: 2.0 }, 0.9, 41);
        let base = solve_fixed_point(Regime::Portfolio, &p).unwrap();
        let scaled = Scaled::new(*p.utility(), 250.0).unwrap();
        let eq =
            solve_with_utility(Regime::Portfolio, &p, &SolverOptions::default(), &scaled).unwrap();
        assert!((eq.pool_mean - base.pool_mean).abs() <= 1e-10);
        for (a, b) in eq.profile.theta.iter().zip(&base.profile.theta) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn rejects_bad_options() {
        let p = params(UtilitySpec::Crra { gamma: 2.0 }, 0.9, 5);
        for opts in [
            SolverOptions {
                damping: 0.0,
                ..SolverOptions::default()
            },
            SolverOptions {
                tolerance: -1.0,
                ..SolverOptions::default()
            },
            SolverOptions {
                start: Some(-1.0),
                ..SolverOptions::default()
            },
        ] {
            assert!(matches!(
                solve_fixed_point_with(Regime::Portfolio, &p, &opts),
                Err(ModelError::InvalidParameter { .. })
            ));
        }
    }
}
