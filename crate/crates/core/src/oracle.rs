//! Brute-force cross-checks: θ grid search and Monte-Carlo averages.
//!
//! Sample `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so results
//! are reproducible whatever the thread schedule. Sums use pairwise
//! reduction in index order.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choice::ChoiceContext;
use crate::economy::{EconomyParams, NoiseKind, NoiseSpec};
use crate::equilibrium::Equilibrium;
use crate::error::{ModelError, Result};

pub const DEFAULT_GRID_POINTS: usize = 10_001;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub grid_points: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_points: DEFAULT_GRID_POINTS,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 3 {
            return Err(ModelError::invalid(
                "oracle.grid_points",
                format!("must be at least 3, got {}", self.grid_points),
            ));
        }
        if self.samples < 1_000 {
            return Err(ModelError::invalid(
                "oracle.samples",
                format!("must be at least 1000, got {}", self.samples),
            ));
        }
        Ok(())
    }

    /// Spacing of the θ search grid.
    pub fn spacing(&self) -> f64 {
        1.0 / (self.grid_points - 1) as f64
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Draws whose consumption fell outside the utility's domain. They are
    /// excluded from `mean`.
    pub domain_violations: usize,
    /// Message of the first violating draw, in sample order.
    pub first_violation: Option<String>,
}

impl Estimate {
    /// `|mean - target| / stderr`; zero when both the gap and the error
    /// vanish, infinite when only the error does.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if gap == 0.0 {
            0.0
        } else if self.stderr == 0.0 {
            f64::INFINITY
        } else {
            gap / self.stderr
        }
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (left, right) = values.split_at(values.len() / 2);
    pairwise_sum(left) + pairwise_sum(right)
}

/// Mean and standard error, computed on values shifted by the first one so
/// that identical samples give that value exactly with zero error.
fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let shift = values[0];
    let d: Vec<f64> = values.iter().map(|v| v - shift).collect();
    let sum = pairwise_sum(&d);
    let mean = shift + sum / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = d.iter().map(|x| x * x).collect();
    let sq = pairwise_sum(&squares);
    let var = ((sq - sum * sum / n as f64) / (n - 1) as f64).max(0.0);
    (mean, (var / n as f64).sqrt())
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Draw of `ε̃`: `±σ` with probability ½ for the two-point law, normal
/// otherwise.
fn draw_noise(noise: &NoiseSpec, rng: &mut ChaCha8Rng) -> f64 {
    if noise.sigma == 0.0 {
        return 0.0;
    }
    match noise.kind {
        NoiseKind::TwoPoint => {
            if rng.random::<bool>() {
                noise.sigma
            } else {
                -noise.sigma
            }
        }
        NoiseKind::GaussHermite { .. } => {
            let z: f64 = rng.sample(StandardNormal);
            noise.sigma * z
        }
    }
}

/// Maximizer of expected utility over `grid_points` equally spaced shares.
/// Ties go to the smaller share.
pub fn grid_search_share(y: f64, ctx: &ChoiceContext, cfg: &OracleConfig) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.grid_points;
    let mut best = (0.0, ctx.expected_utility(y, 0.0)?);
    for j in 1..n {
        let theta = j as f64 / (n - 1) as f64;
        let v = ctx.expected_utility(y, theta)?;
        if v > best.1 {
            best = (theta, v);
        }
    }
    Ok(best.0)
}

/// Average realized repayment `θR + (1-θ)R(y+ε)/ā` over random borrowers.
pub fn monte_carlo_break_even(
    eq: &Equilibrium,
    params: &EconomyParams,
    cfg: &OracleConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    let grid = params.grid();
    if eq.profile.len() != grid.len() {
        return Err(ModelError::invalid(
            "profile",
            "equilibrium profile does not match the scenario grid",
        ));
    }
    let weights = WeightedIndex::new(grid.nodes().iter().map(|n| n.weight))
        .map_err(|e| ModelError::invalid("signals.weights", e.to_string()))?;
    let r = params.interest_rate();
    let a_bar = eq.pool_mean;
    let noise = params.noise();
    let values: Vec<f64> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, i);
            let k = weights.sample(&mut rng);
            let eps = draw_noise(noise, &mut rng);
            let theta = eq.profile.theta[k];
            let y = grid.nodes()[k].y;
            if theta == 1.0 {
                r
            } else {
                theta * r + (1.0 - theta) * r * (y + eps) / a_bar
            }
        })
        .collect();
    let (mean, stderr) = summarize(&values);
    Ok(Estimate {
        mean,
        stderr,
        samples: cfg.samples,
        domain_violations: 0,
        first_violation: None,
    })
}

/// Sample mean of `u(c)` for group `y` at share `theta`.
pub fn monte_carlo_expected_utility(
    y: f64,
    theta: f64,
    ctx: &ChoiceContext,
    cfg: &OracleConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    let params = ctx.params();
    let noise = params.noise();
    let draws: Vec<std::result::Result<f64, ModelError>> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(cfg.seed, i);
            let eps = draw_noise(noise, &mut rng);
            let c = params.consumption(
                crate::economy::Education::Higher,
                y,
                eps,
                theta,
                ctx.terms(),
            )?;
            ctx.utility().value(c).map_err(|e| e.at(y, eps))
        })
        .collect();
    let mut values = Vec::with_capacity(draws.len());
    let mut violations = 0;
    let mut first_violation = None;
    for d in draws {
        match d {
            Ok(v) => values.push(v),
            Err(e) if e.is_domain_error() => {
                violations += 1;
                first_violation.get_or_insert_with(|| e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    let (mean, stderr) = summarize(&values);
    Ok(Estimate {
        mean,
        stderr,
        samples: cfg.samples,
        domain_violations: violations,
        first_violation,
    })
}
