//! Subcommand implementations. Each returns the document to write plus
//! warnings for stderr; a failure that should still emit its report is
//! carried in [`Report::failure`].

use loanmix_core::choice::{CutoffReport, SetPartition};
use loanmix_core::equilibrium::{NodeVerdict, SweepOutcome};
use loanmix_core::{
    assumption_checks, compare_regimes, comparative_static_sweep, grid_search_share,
    monte_carlo_break_even, solve_fixed_point_with, AssumptionReport, ChoiceContext,
    EconomyParams, Equilibrium, Estimate, OracleConfig, Regime, SweepParam, UtilitySpec,
};
use serde::Serialize;

use crate::error::CliError;
use crate::scenario::Scenario;

/// Largest accepted gap between the closed-form and FOC shares.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-8;
/// Largest accepted gap between FOC and grid-search shares (or the grid
/// spacing, if coarser).
pub const GRID_TOLERANCE: f64 = 1e-4;
/// Largest accepted Monte-Carlo break-even z-score.
pub const Z_TOLERANCE: f64 = 3.0;

#[derive(Debug)]
pub struct Report {
    pub body: String,
    pub warnings: Vec<String>,
    pub failure: Option<CliError>,
}

impl Report {
    fn ok(body: String) -> Self {
        Report {
            body,
            warnings: Vec::new(),
            failure: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2a,
    Fig2b,
}

impl Figure {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fig1" => Some(Figure::Fig1),
            "fig2a" => Some(Figure::Fig2a),
            "fig2b" => Some(Figure::Fig2b),
            _ => None,
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Shortest decimal that round-trips, never in exponent notation.
fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_document(header: &[&str], rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

#[derive(Serialize)]
struct NodeRow {
    y: f64,
    weight: f64,
    theta: f64,
    theta_raw: Option<f64>,
}

#[derive(Serialize)]
struct SetCounts {
    icl_only: usize,
    portfolio: usize,
    cml_only: usize,
}

impl From<&SetPartition> for SetCounts {
    fn from(s: &SetPartition) -> Self {
        SetCounts {
            icl_only: s.icl_only.len(),
            portfolio: s.portfolio.len(),
            cml_only: s.cml_only.len(),
        }
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    scenario: &'a str,
    regime: Regime,
    pool_mean: f64,
    wage: f64,
    capital: f64,
    human_capital: f64,
    iterations: usize,
    fixed_point_residual: f64,
    break_even_residual: f64,
    set_sizes: SetCounts,
    sets: &'a SetPartition,
    cutoffs: &'a CutoffReport,
    assumptions: AssumptionReport,
    nodes: Vec<NodeRow>,
}

fn node_rows(params: &EconomyParams, eq: &Equilibrium) -> Vec<NodeRow> {
    params
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| NodeRow {
            y: n.y,
            weight: n.weight,
            theta: eq.profile.theta[i],
            theta_raw: eq.profile.raw.as_ref().map(|r| r[i]),
        })
        .collect()
}

pub fn solve(s: &Scenario, regime: Regime) -> Result<Report, CliError> {
    let eq = solve_fixed_point_with(regime, &s.params, &s.solver)?;
    let assumptions = assumption_checks(&eq, &s.params)?;
    let mut warnings = Vec::new();
    if !assumptions.supported {
        warnings.push(format!(
            "a-bar * omega = {} does not exceed R = {}; results that rely on it do not apply",
            eq.pool_mean * eq.wage,
            s.params.interest_rate()
        ));
    }
    let report = SolveReport {
        scenario: &s.name,
        regime,
        pool_mean: eq.pool_mean,
        wage: eq.wage,
        capital: eq.capital,
        human_capital: eq.human_capital,
        iterations: eq.iterations,
        fixed_point_residual: eq.fixed_point_residual,
        break_even_residual: eq.break_even_residual,
        set_sizes: SetCounts::from(&eq.sets),
        sets: &eq.sets,
        cutoffs: &eq.cutoffs,
        assumptions,
        nodes: node_rows(&s.params, &eq),
    };
    Ok(Report {
        body: json(&report)?,
        warnings,
        failure: None,
    })
}

#[derive(Serialize)]
struct CompareNode {
    y: f64,
    theta_pr: f64,
    theta_fde: f64,
    eu_pr: f64,
    eu_fde: f64,
    verdict: NodeVerdict,
}

#[derive(Serialize)]
struct CompareReport<'a> {
    scenario: &'a str,
    pool_mean_pr: f64,
    pool_mean_fde: f64,
    delta_pool_mean: f64,
    pareto: bool,
    in_scope: bool,
    scope: &'a str,
    set_sizes_pr: SetCounts,
    set_sizes_fde: SetCounts,
    nodes: Vec<CompareNode>,
}

pub fn compare(s: &Scenario) -> Result<Report, CliError> {
    let w = compare_regimes(&s.params, &s.solver)?;
    let nodes = (0..w.signals.len())
        .map(|i| CompareNode {
            y: w.signals[i],
            theta_pr: w.portfolio.profile.theta[i],
            theta_fde: w.funding_diversity.profile.theta[i],
            eu_pr: w.eu_portfolio[i],
            eu_fde: w.eu_funding_diversity[i],
            verdict: w.verdicts[i],
        })
        .collect();
    let report = CompareReport {
        scenario: &s.name,
        pool_mean_pr: w.portfolio.pool_mean,
        pool_mean_fde: w.funding_diversity.pool_mean,
        delta_pool_mean: w.delta_pool_mean,
        pareto: w.pareto,
        in_scope: w.scope.in_scope,
        scope: &w.scope.reason,
        set_sizes_pr: SetCounts::from(&w.portfolio.sets),
        set_sizes_fde: SetCounts::from(&w.funding_diversity.sets),
        nodes,
    };
    let mut warnings = Vec::new();
    if !w.scope.in_scope {
        warnings.push(format!(
            "configuration is outside the hypotheses of the dominance result ({}); \
             verdict reported without guarantee",
            w.scope.reason
        ));
    }
    Ok(Report {
        body: json(&report)?,
        warnings,
        failure: None,
    })
}

fn figure_rows(
    params: &EconomyParams,
    s: &Scenario,
    prefix: Option<f64>,
    with_raw: bool,
) -> Result<Vec<Vec<String>>, CliError> {
    let pr = solve_fixed_point_with(Regime::Portfolio, params, &s.solver)?;
    let fde = solve_fixed_point_with(Regime::FundingDiversity, params, &s.solver)?;
    let raw = pr.profile.raw.as_ref();
    Ok(params
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let mut row = Vec::with_capacity(5);
            if let Some(a) = prefix {
                row.push(num(a));
            }
            row.push(num(n.y));
            row.push(num(pr.profile.theta[i]));
            row.push(num(fde.profile.theta[i]));
            if with_raw {
                row.push(raw.map(|r| num(r[i])).unwrap_or_default());
            }
            row
        })
        .collect())
}

/// Share profiles as CSV. `fig2b` stacks the scenario at `A` and at
/// `a1` (default `A + 1`).
pub fn figure(s: &Scenario, which: Figure, a1: Option<f64>) -> Result<Report, CliError> {
    let quadratic = s.params.utility().is_quadratic();
    match which {
        Figure::Fig1 if quadratic => {
            return Err(CliError::Invalid(
                "fig1 needs CRRA or CARA utility; the scenario is quadratic".into(),
            ))
        }
        Figure::Fig2a | Figure::Fig2b if !quadratic => {
            return Err(CliError::Invalid(format!(
                "fig2 needs quadratic utility; the scenario is {}",
                s.params.utility().family_name()
            )))
        }
        _ => {}
    }
    let body = match which {
        Figure::Fig1 => csv_document(
            &["y", "theta_PR", "theta_FDE"],
            figure_rows(&s.params, s, None, false)?,
        )?,
        Figure::Fig2a => csv_document(
            &["y", "theta_PR", "theta_FDE", "theta_raw"],
            figure_rows(&s.params, s, None, true)?,
        )?,
        Figure::Fig2b => {
            let a0 = s.params.basic_capital();
            let a1 = a1.unwrap_or(a0 + 1.0);
            if a1.is_nan() || a1 <= a0 {
                return Err(CliError::Invalid(format!(
                    "--a1 must exceed the scenario's A = {a0}, got {a1}"
                )));
            }
            let high = s.params.with_basic_capital(a1)?;
            let mut rows = figure_rows(&s.params, s, Some(a0), true)?;
            rows.extend(figure_rows(&high, s, Some(a1), true)?);
            csv_document(&["A", "y", "theta_PR", "theta_FDE", "theta_raw"], rows)?
        }
    };
    Ok(Report::ok(body))
}

pub fn sweep(s: &Scenario, param: &str, values: &[f64]) -> Result<Report, CliError> {
    let Some(param) = SweepParam::parse(param) else {
        return Err(CliError::Invalid(format!(
            "unknown sweep parameter `{param}` (expected beta_over_alpha, A or sigma2)"
        )));
    };
    if values.is_empty() {
        return Err(CliError::Invalid("--values: no values given".into()));
    }
    if param == SweepParam::BetaOverAlpha && !matches!(s.params.utility(), UtilitySpec::Quadratic { .. }) {
        return Err(CliError::Invalid(
            "beta_over_alpha sweeps need quadratic utility".into(),
        ));
    }
    let sweep = comparative_static_sweep(param, values, &s.params, &s.solver)
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut failed = 0;
    for point in &sweep.points {
        match &point.outcome {
            SweepOutcome::Solved {
                pool_mean, theta, ..
            } => {
                for (y, t) in sweep.signals.iter().zip(theta) {
                    rows.push(vec![num(point.value), num(*y), num(*t), num(*pool_mean)]);
                }
            }
            SweepOutcome::Failed { error } => {
                failed += 1;
                warnings.push(format!("{} = {}: {error}", param.name(), point.value));
            }
        }
    }
    if !sweep.all_nonincreasing() {
        let nodes: Vec<String> = sweep
            .nonincreasing
            .iter()
            .zip(&sweep.signals)
            .filter(|(ok, _)| !**ok)
            .map(|(_, y)| num(*y))
            .collect();
        warnings.push(format!(
            "theta rises with {} at y = {}",
            param.name(),
            nodes.join(", ")
        ));
    }
    let failure = (failed > 0).then(|| {
        CliError::Model(loanmix_core::ModelError::Internal(format!(
            "{failed} of {} sweep points did not solve",
            sweep.points.len()
        )))
    });
    Ok(Report {
        body: csv_document(&["param_value", "y", "theta", "a_bar"], rows)?,
        warnings,
        failure,
    })
}

#[derive(Serialize)]
struct OracleNode {
    y: f64,
    theta_foc: f64,
    theta_closed: Option<f64>,
    theta_grid: f64,
}

#[derive(Serialize)]
struct BreakEvenCheck {
    regime: Regime,
    pool_mean: f64,
    mean_repayment: f64,
    stderr: f64,
    z: f64,
}

#[derive(Serialize)]
struct OracleReport<'a> {
    scenario: &'a str,
    config: OracleConfig,
    pool_mean: f64,
    max_closed_vs_foc: Option<f64>,
    max_foc_vs_grid: f64,
    grid_tolerance: f64,
    break_even: Vec<BreakEvenCheck>,
    pass: bool,
    breaches: Vec<String>,
    nodes: Vec<OracleNode>,
}

/// Closed form vs FOC vs grid search on every node of the PR equilibrium,
/// then sampled break-even for both regimes. `abar_offset` corrupts the
/// pool means before checking (a negative test of the oracle itself).
pub fn oracle(s: &Scenario, cfg: &OracleConfig, abar_offset: f64) -> Result<Report, CliError> {
    cfg.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    let mut pr = solve_fixed_point_with(Regime::Portfolio, &s.params, &s.solver)?;
    let mut fde = solve_fixed_point_with(Regime::FundingDiversity, &s.params, &s.solver)?;
    pr.pool_mean += abar_offset;
    fde.pool_mean += abar_offset;

    let ctx = ChoiceContext::new(&s.params, pr.pool_mean, pr.wage)?;
    let quadratic = s.params.utility().is_quadratic();
    let mut nodes = Vec::with_capacity(s.params.grid().len());
    let mut closed_gap: Option<f64> = None;
    let mut grid_gap: f64 = 0.0;
    for (i, y) in s.params.grid().signals().enumerate() {
        let theta_foc = pr.profile.theta[i];
        let theta_closed = if quadratic {
            Some(ctx.optimal_share_quadratic(y)?.theta)
        } else {
            None
        };
        if let Some(c) = theta_closed {
            let gap = (c - theta_foc).abs();
            closed_gap = Some(closed_gap.map_or(gap, |g| g.max(gap)));
        }
        let theta_grid = grid_search_share(y, &ctx, cfg)?;
        grid_gap = grid_gap.max((theta_grid - theta_foc).abs());
        nodes.push(OracleNode {
            y,
            theta_foc,
            theta_closed,
            theta_grid,
        });
    }

    let r = s.params.interest_rate();
    let mut checks = Vec::new();
    for eq in [&pr, &fde] {
        let est: Estimate = monte_carlo_break_even(eq, &s.params, cfg)?;
        checks.push(BreakEvenCheck {
            regime: eq.regime,
            pool_mean: eq.pool_mean,
            mean_repayment: est.mean,
            stderr: est.stderr,
            z: est.z_score(r),
        });
    }

    let grid_tolerance = GRID_TOLERANCE.max(cfg.spacing());
    let mut breaches = Vec::new();
    if let Some(g) = closed_gap {
        if g > CLOSED_FORM_TOLERANCE {
            breaches.push(format!("closed form vs FOC gap {g:e} > {CLOSED_FORM_TOLERANCE:e}"));
        }
    }
    if grid_gap > grid_tolerance {
        breaches.push(format!("FOC vs grid search gap {grid_gap:e} > {grid_tolerance:e}"));
    }
    for c in &checks {
        if c.z.is_nan() || c.z > Z_TOLERANCE {
            breaches.push(format!(
                "{} break-even z-score {} > {Z_TOLERANCE}",
                c.regime, c.z
            ));
        }
    }
    let report = OracleReport {
        scenario: &s.name,
        config: *cfg,
        pool_mean: pr.pool_mean,
        max_closed_vs_foc: closed_gap,
        max_foc_vs_grid: grid_gap,
        grid_tolerance,
        break_even: checks,
        pass: breaches.is_empty(),
        breaches: breaches.clone(),
        nodes,
    };
    let failure = (!breaches.is_empty()).then(|| CliError::Breach(breaches.join("; ")));
    Ok(Report {
        body: json(&report)?,
        warnings: Vec::new(),
        failure,
    })
}
