//! Cutoff signals separating ICL-only, portfolio and CML-only groups.

use serde::Serialize;

use super::quadratic::level_set_roots;
use super::{ChoiceContext, ThetaProfile};
use crate::economy::SignalGrid;
use crate::error::{ModelError, Result};

/// Subintervals of `[y¹, y²]` scanned for sign changes before bisection.
pub const INDIFFERENCE_SCAN_INTERVALS: usize = 512;
/// Width in `y` at which cutoff bisection stops.
const ROOT_TOLERANCE: f64 = 1e-12;
/// Tolerance on `θ` when classifying a group as ICL-only or CML-only.
pub const SET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMethod {
    /// Quadratic-utility root formulas (roots may lie outside the grid).
    ClosedForm,
    /// Sign-change scan over `[y¹, y²]` refined by bisection.
    Scan,
}

/// Cutoff signals at given pool terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffReport {
    pub method: CutoffMethod,
    /// `ŷ`: indifferent between ICL-only and CML-only (ascending).
    pub indifference: Vec<f64>,
    /// `y'`: boundaries between the portfolio set and ICL-only.
    pub portfolio_icl: Vec<f64>,
    /// `y''`: boundaries between the portfolio set and CML-only.
    pub portfolio_cml: Vec<f64>,
    /// Signal at which the unclamped share peaks (quadratic, `ā + σ`).
    pub peak: Option<f64>,
    /// False when the `y'` discriminant is negative: nobody mixes.
    pub portfolio_region: bool,
    /// False when the `y''` discriminant is negative: nobody is CML-only.
    pub cml_region: bool,
}

/// Node indices of the three funding sets, in grid order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetPartition {
    pub icl_only: Vec<usize>,
    pub portfolio: Vec<usize>,
    pub cml_only: Vec<usize>,
}

impl SetPartition {
    /// True when every ICL-only node lies below every portfolio node, and
    /// every portfolio node below every CML-only node.
    pub fn is_ordered(&self) -> bool {
        let max = |v: &[usize]| v.iter().copied().max();
        let min = |v: &[usize]| v.iter().copied().min();
        let below = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        };
        below(max(&self.icl_only), min(&self.portfolio))
            && below(max(&self.portfolio), min(&self.cml_only))
            && below(max(&self.icl_only), min(&self.cml_only))
    }
}

/// Classify each node as ICL-only (`θ ≤ tol`), CML-only (`θ ≥ 1 - tol`) or
/// portfolio.
pub fn classify_sets(profile: &ThetaProfile, grid: &SignalGrid) -> Result<SetPartition> {
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
    let mut sets = SetPartition {
        icl_only: Vec::new(),
        portfolio: Vec::new(),
        cml_only: Vec::new(),
    };
    for (i, &theta) in profile.theta.iter().enumerate() {
        if theta <= SET_TOLERANCE {
            sets.icl_only.push(i);
        } else if theta >= 1.0 - SET_TOLERANCE {
            sets.cml_only.push(i);
        } else {
            sets.portfolio.push(i);
        }
    }
    Ok(sets)
}

/// All roots of `f` on `[lo, hi]`: sign changes over `intervals` equal
/// subintervals, each refined by bisection.
fn scan_roots<F>(f: F, lo: f64, hi: f64, intervals: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    if hi <= lo {
        let v = f(lo)?;
        return Ok(if v == 0.0 { vec![lo] } else { Vec::new() });
    }
    let at = |i: usize| {
        if i == intervals {
            hi
        } else {
            lo + (hi - lo) * i as f64 / intervals as f64
        }
    };
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&last| (r - last).abs() > ROOT_TOLERANCE) {
            roots.push(r);
        }
    };
    let mut a = lo;
    let mut fa = f(a)?;
    for i in 1..=intervals {
        let b = at(i);
        let fb = f(b)?;
        if fa == 0.0 {
            push(a, &mut roots);
        } else if fb != 0.0 && fa.signum() != fb.signum() {
            let (mut l, mut r, mut fl) = (a, b, fa);
            while r - l > ROOT_TOLERANCE {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                let fm = f(m)?;
                if fm == 0.0 {
                    l = m;
                    r = m;
                    break;
                }
                if fm.signum() == fl.signum() {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
            }
            push(0.5 * (l + r), &mut roots);
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        push(hi, &mut roots);
    }
    Ok(roots)
}

/// Signals in `[y¹, y²]` at which ICL-only and CML-only give the same
/// expected utility. Empty when the difference never changes sign.
pub fn indifference_signals(ctx: &ChoiceContext) -> Result<Vec<f64>> {
    let grid = ctx.params().grid();
    scan_roots(
        |y| Ok(ctx.expected_utility(y, 0.0)? - ctx.expected_utility(y, 1.0)?),
        grid.lower(),
        grid.upper(),
        INDIFFERENCE_SCAN_INTERVALS,
    )
}

/// Cutoff signals at the context's pool terms: closed form for quadratic
/// utility, scanned over the grid range otherwise.
pub fn cutoff_report(ctx: &ChoiceContext) -> Result<CutoffReport> {
    let params = ctx.params();
    if params.utility().is_quadratic() {
        let q = ctx.quadratic_constants()?;
        let sigma = params.noise().sigma;
        let a_bar = ctx.pool_mean();
        let portfolio_icl = level_set_roots(a_bar, q.a_prime, q.c, sigma);
        let portfolio_cml = level_set_roots(a_bar, q.a_prime, q.c + 1.0, sigma);
        return Ok(CutoffReport {
            method: CutoffMethod::ClosedForm,
            indifference: level_set_roots(a_bar, q.a_prime, q.c + 0.5, sigma),
            portfolio_region: !portfolio_icl.is_empty(),
            cml_region: !portfolio_cml.is_empty(),
            portfolio_icl,
            portfolio_cml,
            peak: (sigma > 0.0).then_some(a_bar + sigma),
        });
    }
    let grid = params.grid();
    let (lo, hi) = (grid.lower(), grid.upper());
    let portfolio_icl = scan_roots(
        |y| ctx.foc_derivative(y, 0.0),
        lo,
        hi,
        INDIFFERENCE_SCAN_INTERVALS,
    )?;
    let portfolio_cml = scan_roots(
        |y| ctx.foc_derivative(y, 1.0),
        lo,
        hi,
        INDIFFERENCE_SCAN_INTERVALS,
    )?;
    Ok(CutoffReport {
        method: CutoffMethod::Scan,
        indifference: indifference_signals(ctx)?,
        portfolio_region: !portfolio_icl.is_empty(),
        cml_region: !portfolio_cml.is_empty(),
        portfolio_icl,
        portfolio_cml,
        peak: None,
    })
}
