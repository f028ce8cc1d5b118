use serde::Serialize;

use super::{solve_fixed_point_with, Regime, SolverOptions};
use crate::choice::SetPartition;
use crate::economy::{EconomyParams, NoiseSpec, UtilitySpec};
use crate::error::{ModelError, Result};

/// Slack allowed when checking that shares do not rise along a sweep.
pub const MONOTONE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// `β/α` for quadratic utility; `α` is held fixed.
    BetaOverAlpha,
    /// Basic human capital `A`.
    BasicCapital,
    /// Noise variance `σ²`.
    NoiseVariance,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::BetaOverAlpha => "beta_over_alpha",
            SweepParam::BasicCapital => "A",
            SweepParam::NoiseVariance => "sigma2",
        }
    }

    /// Accepts the names printed by [`SweepParam::name`] and a few aliases.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "beta_over_alpha" | "beta/alpha" => Some(SweepParam::BetaOverAlpha),
            "A" | "basic_capital" => Some(SweepParam::BasicCapital),
            "sigma2" | "sigma^2" | "variance" => Some(SweepParam::NoiseVariance),
            _ => None,
        }
    }

    /// Scenario with this parameter set to `value`.
    pub fn apply(self, params: &EconomyParams, value: f64) -> Result<EconomyParams> {
        match self {
            SweepParam::BetaOverAlpha => {
                let UtilitySpec::Quadratic { alpha, .. } = *params.utility() else {
                    return Err(ModelError::WrongUtility {
                        expected: "quadratic",
                    });
                };
                params.with_utility(UtilitySpec::Quadratic {
                    alpha,
                    beta: value * alpha,
                })
            }
            SweepParam::BasicCapital => params.with_basic_capital(value),
            SweepParam::NoiseVariance => {
                if value.is_nan() || value < 0.0 {
                    return Err(ModelError::invalid(
                        "sweep.values",
                        format!("variance must be nonnegative, got {value}"),
                    ));
                }
                params.with_noise(NoiseSpec {
                    sigma: value.sqrt(),
                    ..*params.noise()
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SweepOutcome {
    Solved {
        pool_mean: f64,
        theta: Vec<f64>,
        sets: SetPartition,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: SweepOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub signals: Vec<f64>,
    pub points: Vec<SweepPoint>,
    /// Per node: the share never rises between consecutive solved points.
    pub nonincreasing: Vec<bool>,
}

impl Sweep {
    pub fn all_nonincreasing(&self) -> bool {
        self.nonincreasing.iter().all(|&b| b)
    }
}

/// Solves the PR equilibrium at each value. A failing point is recorded
/// and the sweep moves on.
pub fn comparative_static_sweep(
    param: SweepParam,
    values: &[f64],
    params: &EconomyParams,
    options: &SolverOptions,
) -> Result<Sweep> {
    if values.is_empty() {
        return Err(ModelError::invalid("sweep.values", "no values given"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::invalid("sweep.values", "values must be finite"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModelError::invalid(
            "sweep.values",
            "values must be strictly increasing",
        ));
    }
    if param == SweepParam::BetaOverAlpha && !params.utility().is_quadratic() {
        return Err(ModelError::WrongUtility {
            expected: "quadratic",
        });
    }
    let signals: Vec<f64> = params.grid().signals().collect();
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let solved = param
            .apply(params, value)
            .and_then(|p| solve_fixed_point_with(Regime::Portfolio, &p, options));
        let outcome = match solved {
            Ok(eq) => SweepOutcome::Solved {
                pool_mean: eq.pool_mean,
                theta: eq.profile.theta,
                sets: eq.sets,
            },
            Err(e) => SweepOutcome::Failed {
                error: e.to_string(),
            },
        };
        points.push(SweepPoint { value, outcome });
    }

    let mut nonincreasing = vec![true; signals.len()];
    let mut previous: Option<&Vec<f64>> = None;
    for point in &points {
        if let SweepOutcome::Solved { theta, .. } = &point.outcome {
            if let Some(prev) = previous {
                for (flag, (a, b)) in nonincreasing.iter_mut().zip(prev.iter().zip(theta)) {
                    if *b > *a + MONOTONE_TOLERANCE {
                        *flag = false;
                    }
                }
            }
            previous = Some(theta);
        }
    }
    Ok(Sweep {
        param,
        signals,
        points,
        nonincreasing,
    })
}
