//! Portfolio choice of a single signal group given the ICL pool terms.

mod cutoffs;
mod quadratic;

pub use cutoffs::{
    classify_sets, cutoff_report, indifference_signals, CutoffMethod, CutoffReport, SetPartition,
    INDIFFERENCE_SCAN_INTERVALS, SET_TOLERANCE,
};
pub use quadratic::{level_set_roots, QuadraticConstants};

use serde::Serialize;

use crate::economy::{EconomyParams, Education, LoanTerms, Utility};
use crate::error::{ModelError, Result};

/// Relative tolerance on `|dEU/dθ|` at which FOC bisection stops.
pub const FOC_RELATIVE_TOLERANCE: f64 = 1e-12;
pub const FOC_MAX_ITERATIONS: usize = 200;

/// Everything a signal group needs to evaluate its options: the scenario,
/// the pool mean `ā` and the wage `ω`.
#[derive(Clone, Copy)]
pub struct ChoiceContext<'a> {
    params: &'a EconomyParams,
    terms: LoanTerms,
    utility: &'a dyn Utility,
}

impl std::fmt::Debug for ChoiceContext<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChoiceContext")
            .field("terms", &self.terms)
            .field("utility", self.params.utility())
            .finish()
    }
}

/// Optimal CML share of one group, with the unconstrained FOC root when
/// the utility makes it available in closed form (quadratic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShareChoice {
    pub theta: f64,
    pub raw: Option<f64>,
}

/// The two motives of the first-order condition: lower expected repayment
/// and insurance through the covariance of ability with marginal utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FocTerms {
    pub repayment: f64,
    pub insurance: f64,
}

impl FocTerms {
    pub fn total(&self) -> f64 {
        self.repayment + self.insurance
    }
}

/// CML shares across the signal grid, in grid order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaProfile {
    pub theta: Vec<f64>,
    /// Unclamped shares, available for quadratic utility.
    pub raw: Option<Vec<f64>>,
}

impl ThetaProfile {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn from_choices(choices: &[ShareChoice]) -> Self {
        let theta = choices.iter().map(|c| c.theta).collect();
        let raw = choices.iter().map(|c| c.raw).collect::<Option<Vec<f64>>>();
        ThetaProfile { theta, raw }
    }
}

impl<'a> ChoiceContext<'a> {
    pub fn new(params: &'a EconomyParams, pool_mean: f64, wage: f64) -> Result<Self> {
        if !(pool_mean.is_finite() && pool_mean > 0.0) {
            return Err(ModelError::invalid(
                "pool_mean",
                format!("must be positive, got {pool_mean}"),
            ));
        }
        if !(wage.is_finite() && wage > 0.0) {
            return Err(ModelError::invalid(
                "wage",
                format!("must be positive, got {wage}"),
            ));
        }
        Ok(ChoiceContext {
            params,
            terms: LoanTerms { pool_mean, wage },
            utility: params.utility(),
        })
    }

    /// Evaluate choices under another utility (e.g. a rescaled one).
    pub fn with_utility(self, utility: &'a dyn Utility) -> Self {
        ChoiceContext { utility, ..self }
    }

    pub fn params(&self) -> &'a EconomyParams {
        self.params
    }

    pub fn pool_mean(&self) -> f64 {
        self.terms.pool_mean
    }

    pub fn wage(&self) -> f64 {
        self.terms.wage
    }

    pub fn terms(&self) -> LoanTerms {
        self.terms
    }

    pub fn utility(&self) -> &'a dyn Utility {
        self.utility
    }

    fn consumption(&self, y: f64, eps: f64, theta: f64) -> Result<f64> {
        self.params
            .consumption(Education::Higher, y, eps, theta, self.terms)
    }

    /// `E[u(c̃_y)]` at CML share `theta`.
    pub fn expected_utility(&self, y: f64, theta: f64) -> Result<f64> {
        let mut total = 0.0;
        for node in self.params.noise_nodes() {
            let c = self.consumption(y, node.eps, theta)?;
            let u = self.utility.value(c).map_err(|e| e.at(y, node.eps))?;
            total += node.weight * u;
        }
        Ok(total)
    }

    /// Utility of skipping higher education, `u(Aω)`.
    pub fn outside_option_utility(&self) -> Result<f64> {
        let c = self
            .params
            .consumption(Education::Basic, 0.0, 0.0, 0.0, self.terms)?;
        self.utility.value(c)
    }

    /// `dE[u(c̃_y)]/dθ = Σ w u'(c) (R/ā)((y+ε) - ā)`.
    pub fn foc_derivative(&self, y: f64, theta: f64) -> Result<f64> {
        let ratio = self.params.interest_rate() / self.terms.pool_mean;
        let mut total = 0.0;
        for node in self.params.noise_nodes() {
            let c = self.consumption(y, node.eps, theta)?;
            let mu = self.utility.marginal(c).map_err(|e| e.at(y, node.eps))?;
            total += node.weight * mu * ratio * ((y + node.eps) - self.terms.pool_mean);
        }
        Ok(total)
    }

    /// Splits the derivative into `(R/ā)(ā_y - ā)E[u']` and
    /// `(R/ā)cov(ã_y, u'(c̃_y))`.
    pub fn foc_terms(&self, y: f64, theta: f64) -> Result<FocTerms> {
        let ratio = self.params.interest_rate() / self.terms.pool_mean;
        let mut mean_mu = 0.0;
        let mut cross = 0.0;
        for node in self.params.noise_nodes() {
            let c = self.consumption(y, node.eps, theta)?;
            let mu = self.utility.marginal(c).map_err(|e| e.at(y, node.eps))?;
            mean_mu += node.weight * mu;
            cross += node.weight * node.eps * mu;
        }
        // With E[ε] = 0, cov(y + ε, u') = E[ε u'] - E[ε]E[u'] = E[ε u'].
        Ok(FocTerms {
            repayment: ratio * (y - self.terms.pool_mean) * mean_mu,
            insurance: ratio * cross,
        })
    }

    /// Expected-utility maximizing CML share on `[0, 1]`.
    ///
    /// Expected utility is concave in `θ` (consumption is affine in it), so
    /// corner solutions are read off the derivative signs at 0 and 1 and an
    /// interior optimum is found by bisection on the derivative.
    pub fn optimal_share(&self, y: f64) -> Result<ShareChoice> {
        let d0 = self.foc_derivative(y, 0.0)?;
        if d0.is_nan() {
            return Err(ModelError::Internal(format!(
                "FOC is NaN at y = {y}, theta = 0"
            )));
        }
        if d0 <= 0.0 {
            let raw = self.raw_share(y, d0)?;
            return Ok(ShareChoice { theta: 0.0, raw });
        }
        let d1 = self.foc_derivative(y, 1.0)?;
        if d1.is_nan() {
            return Err(ModelError::Internal(format!(
                "FOC is NaN at y = {y}, theta = 1"
            )));
        }
        let raw = self.raw_share_from(d0, d1);
        if d1 >= 0.0 {
            return Ok(ShareChoice { theta: 1.0, raw });
        }

        let tolerance = FOC_RELATIVE_TOLERANCE * d0.abs();
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut mid = 0.5;
        for _ in 0..FOC_MAX_ITERATIONS {
            mid = 0.5 * (lo + hi);
            let d = self.foc_derivative(y, mid)?;
            if d.is_nan() {
                return Err(ModelError::Internal(format!(
                    "FOC is NaN at y = {y}, theta = {mid}"
                )));
            }
            if d.abs() <= tolerance {
                break;
            }
            if d > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON {
                mid = 0.5 * (lo + hi);
                break;
            }
        }
        if !(0.0..=1.0).contains(&mid) {
            return Err(ModelError::Internal(format!(
                "FOC bisection left [0, 1] at y = {y}"
            )));
        }
        Ok(ShareChoice { theta: mid, raw })
    }

    fn raw_share(&self, y: f64, d0: f64) -> Result<Option<f64>> {
        if !self.params.utility().is_quadratic() {
            return Ok(None);
        }
        let d1 = self.foc_derivative(y, 1.0)?;
        Ok(self.raw_share_from(d0, d1))
    }

    /// For quadratic utility the derivative is affine in `θ`, so its root
    /// follows from the values at 0 and 1.
    fn raw_share_from(&self, d0: f64, d1: f64) -> Option<f64> {
        if !self.params.utility().is_quadratic() {
            return None;
        }
        let slope = d1 - d0;
        if slope == 0.0 {
            return None;
        }
        Some(-d0 / slope)
    }

    /// Choice when only one channel may be used: CML (1) if it gives strictly
    /// higher expected utility, ICL (0) otherwise. Exact ties go to ICL.
    pub fn binary_choice(&self, y: f64) -> Result<f64> {
        let icl = self.expected_utility(y, 0.0)?;
        let cml = self.expected_utility(y, 1.0)?;
        Ok(if cml > icl { 1.0 } else { 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{
        NoiseSpec, ProductionSpec, Scaled, SignalGrid, UtilitySpec,
    };

    fn params(utility: UtilitySpec, sigma: f64) -> EconomyParams {
        EconomyParams::new(
            1.2,
            2.0,
            SignalGrid::uniform(1.0, 2.2, 25).unwrap(),
            NoiseSpec::two_point(sigma),
            utility,
            ProductionSpec::DirectWage { wage: 1.5 },
        )
        .unwrap()
    }

    const UTILITIES: [UtilitySpec; 3] = [
        UtilitySpec::Crra { gamma: 2.0 },
        UtilitySpec::Cara { lambda: 0.5 },
        UtilitySpec::Quadratic {
            alpha: 4.0,
            beta: 0.5,
        },
    ];

    fn grid_argmax(ctx: &ChoiceContext, y: f64, n: usize) -> f64 {
        let mut best = (0.0, f64::NEG_INFINITY);
        for j in 0..n {
            let t = j as f64 / (n - 1) as f64;
            let v = ctx.expected_utility(y, t).unwrap();
            if v > best.1 {
                best = (t, v);
            }
        }
        best.0
    }

    #[test]
    fn degenerate_noise_expected_utility() {
        let p = params(UtilitySpec::Crra { gamma: 2.0 }, 0.0);
        let ctx = ChoiceContext::new(&p, 1.4, 1.5).unwrap();
        let c = p
            .consumption(Education::Higher, 1.9, 0.0, 0.3, ctx.terms())
            .unwrap();
        assert_eq!(
            ctx.expected_utility(1.9, 0.3).unwrap(),
            p.utility().value(c).unwrap()
        );
    }

    #[test]
    fn foc_terms_sum_to_derivative() {
        for u in UTILITIES {
            let p = params(u, 0.9);
            let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
            for y in [1.0, 1.3, 1.7, 2.2] {
                for theta in [0.0, 0.4, 1.0] {
                    let d = ctx.foc_derivative(y, theta).unwrap();
                    let t = ctx.foc_terms(y, theta).unwrap();
                    assert!((d - t.total()).abs() <= 1e-14 * d.abs().max(1e-3));
                    assert!(t.insurance < 0.0);
                }
            }
        }
    }

    #[test]
    fn low_signals_have_negative_derivative_and_choose_icl() {
        for u in UTILITIES {
            let p = params(u, 0.9);
            let ctx = ChoiceContext::new(&p, 1.5, 1.5).unwrap();
            for y in [1.0, 1.25, 1.5] {
                for theta in [0.0, 0.5, 1.0] {
                    let t = ctx.foc_terms(y, theta).unwrap();
                    assert!(t.repayment <= 0.0 && t.insurance < 0.0);
                    assert!(ctx.foc_derivative(y, theta).unwrap() < 0.0);
                }
                assert_eq!(ctx.optimal_share(y).unwrap().theta, 0.0);
                assert_eq!(ctx.binary_choice(y).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn no_noise_high_signals_go_cml() {
        for u in UTILITIES {
            let p = params(u, 0.0);
            let ctx = ChoiceContext::new(&p, 1.5, 1.5).unwrap();
            for y in [1.55, 1.8, 2.2] {
                for theta in [0.0, 0.5, 1.0] {
                    assert!(ctx.foc_derivative(y, theta).unwrap() > 0.0);
                }
                assert_eq!(ctx.optimal_share(y).unwrap().theta, 1.0);
                assert_eq!(ctx.binary_choice(y).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn optimal_share_matches_grid_search() {
        for u in UTILITIES {
            let p = params(u, 0.9);
            let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
            for y in [1.2, 1.4, 1.6, 1.9, 2.2] {
                let theta = ctx.optimal_share(y).unwrap().theta;
                let grid = grid_argmax(&ctx, y, 10_001);
                assert!((theta - grid).abs() <= 1e-4, "{u:?} y={y}: {theta} vs {grid}");
            }
        }
    }

    #[test]
    fn interior_share_has_zero_derivative() {
        let p = params(UtilitySpec::Cara { lambda: 0.5 }, 0.9);
        let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
        let mut interior = 0;
        for y in p.grid().signals() {
            let s = ctx.optimal_share(y).unwrap();
            if s.theta > 0.0 && s.theta < 1.0 {
                interior += 1;
                let d0 = ctx.foc_derivative(y, 0.0).unwrap();
                let d = ctx.foc_derivative(y, s.theta).unwrap();
                assert!(d.abs() <= 1e-10 * d0.abs());
            }
        }
        assert!(interior > 0);
    }

    #[test]
    fn quadratic_raw_share_is_reported() {
        let p = params(
            UtilitySpec::Quadratic {
                alpha: 4.0,
                beta: 0.5,
            },
            0.9,
        );
        let ctx = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
        let s = ctx.optimal_share(1.0).unwrap();
        assert_eq!(s.theta, 0.0);
        assert!(s.raw.unwrap() < 0.0);
        let crra = params(UtilitySpec::Crra { gamma: 2.0 }, 0.9);
        let ctx = ChoiceContext::new(&crra, 1.3, 1.5).unwrap();
        assert_eq!(ctx.optimal_share(1.8).unwrap().raw, None);
    }

    #[test]
    fn rescaled_utility_keeps_share() {
        let p = params(UtilitySpec::Crra { gamma: 2.0 }, 0.9);
        let scaled = Scaled::new(*p.utility(), 37.5).unwrap();
        let base = ChoiceContext::new(&p, 1.3, 1.5).unwrap();
        let ctx = base.with_utility(&scaled);
        for y in p.grid().signals() {
            let a = base.optimal_share(y).unwrap().theta;
            let b = ctx.optimal_share(y).unwrap().theta;
            assert!((a - b).abs() <= 1e-10, "y={y}: {a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_context() {
        let p = params(UtilitySpec::Crra { gamma: 2.0 }, 0.9);
        assert!(ChoiceContext::new(&p, 0.0, 1.5).is_err());
        assert!(ChoiceContext::new(&p, 1.3, f64::NAN).is_err());
    }
}
