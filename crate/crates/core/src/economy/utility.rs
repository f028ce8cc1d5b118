//! Von Neumann–Morgenstern utility families over adult consumption.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// A strictly increasing, concave utility of consumption.
///
/// Implementations return an error when `c` lies outside the range on which
/// the function is increasing and concave, rather than extrapolating.
pub trait Utility: Send + Sync {
    fn value(&self, c: f64) -> Result<f64>;
    fn marginal(&self, c: f64) -> Result<f64>;
    /// Absolute risk aversion, `-u''(c) / u'(c)`.
    fn ara(&self, c: f64) -> Result<f64>;
}

/// The three utility families used by the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum UtilitySpec {
    /// `u(c) = c^(1-γ) / (1-γ)`, defined for `c > 0`.
    Crra { gamma: f64 },
    /// `u(c) = 1 - exp(-λc)`.
    Cara { lambda: f64 },
    /// `u(c) = αc - βc²/2`, increasing only below the bliss point `α/β`.
    Quadratic { alpha: f64, beta: f64 },
}

impl UtilitySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            UtilitySpec::Crra { gamma } => {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(ModelError::invalid("utility.gamma", "must be positive"));
                }
                if gamma == 1.0 {
                    return Err(ModelError::invalid(
                        "utility.gamma",
                        "gamma = 1 (log utility) is not part of the CRRA family used here",
                    ));
                }
            }
            UtilitySpec::Cara { lambda } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(ModelError::invalid("utility.lambda", "must be positive"));
                }
            }
            UtilitySpec::Quadratic { alpha, beta } => {
                if !(alpha.is_finite() && alpha > 0.0) {
                    return Err(ModelError::invalid("utility.alpha", "must be positive"));
                }
                if !(beta.is_finite() && beta > 0.0) {
                    return Err(ModelError::invalid("utility.beta", "must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            UtilitySpec::Crra { .. } => "crra",
            UtilitySpec::Cara { .. } => "cara",
            UtilitySpec::Quadratic { .. } => "quadratic",
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, UtilitySpec::Quadratic { .. })
    }

    /// Bliss point `α/β` of quadratic utility.
    pub fn bliss_point(&self) -> Option<f64> {
        match *self {
            UtilitySpec::Quadratic { alpha, beta } => Some(alpha / beta),
            _ => None,
        }
    }

    fn check_domain(&self, c: f64) -> Result<()> {
        match *self {
            UtilitySpec::Crra { .. } if c <= 0.0 => {
                Err(ModelError::NonPositiveConsumption { consumption: c })
            }
            UtilitySpec::Quadratic { alpha, beta } if c >= alpha / beta => {
                Err(ModelError::Saturation {
                    consumption: c,
                    bliss: alpha / beta,
                })
            }
            _ => Ok(()),
        }
    }
}

impl Utility for UtilitySpec {
    fn value(&self, c: f64) -> Result<f64> {
        self.check_domain(c)?;
        Ok(match *self {
            UtilitySpec::Crra { gamma } => c.powf(1.0 - gamma) / (1.0 - gamma),
            UtilitySpec::Cara { lambda } => 1.0 - (-lambda * c).exp(),
            UtilitySpec::Quadratic { alpha, beta } => alpha * c - 0.5 * beta * c * c,
        })
    }

    fn marginal(&self, c: f64) -> Result<f64> {
        self.check_domain(c)?;
        Ok(match *self {
            UtilitySpec::Crra { gamma } => c.powf(-gamma),
            UtilitySpec::Cara { lambda } => lambda * (-lambda * c).exp(),
            UtilitySpec::Quadratic { alpha, beta } => alpha - beta * c,
        })
    }

    fn ara(&self, c: f64) -> Result<f64> {
        self.check_domain(c)?;
        Ok(match *self {
            UtilitySpec::Crra { gamma } => gamma / c,
            UtilitySpec::Cara { lambda } => lambda,
            UtilitySpec::Quadratic { alpha, beta } => beta / (alpha - beta * c),
        })
    }
}

/// A utility multiplied by a positive constant. Preferences (and therefore
/// every optimal choice) are unchanged; used to probe scale invariance.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<U> {
    pub inner: U,
    pub factor: f64,
}

impl<U: Utility> Scaled<U> {
    pub fn new(inner: U, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(ModelError::invalid("scale", "must be positive"));
        }
        Ok(Scaled { inner, factor })
    }
}

impl<U: Utility> Utility for Scaled<U> {
    fn value(&self, c: f64) -> Result<f64> {
        Ok(self.factor * self.inner.value(c)?)
    }

    fn marginal(&self, c: f64) -> Result<f64> {
        Ok(self.factor * self.inner.marginal(c)?)
    }

    fn ara(&self, c: f64) -> Result<f64> {
        self.inner.ara(c)
    }
}
