//! Firms: competitive factor pricing of physical and human capital.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProductionSpec {
    /// Wage per effective unit of human capital given directly.
    DirectWage { wage: f64 },
    /// `F(K, H) = K^δ H^(1-δ)`.
    CobbDouglas { delta: f64 },
}

/// Factor quantities and prices satisfying `F_K = R` and `F_L = ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductionSolution {
    /// Physical capital. `0.0` when the wage is given directly.
    pub capital: f64,
    pub wage: f64,
    /// `K/H`; `None` for a direct wage.
    pub capital_ratio: Option<f64>,
}

impl ProductionSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ProductionSpec::DirectWage { wage } => {
                if !(wage.is_finite() && wage > 0.0) {
                    return Err(ModelError::invalid("production.wage", "must be positive"));
                }
            }
            ProductionSpec::CobbDouglas { delta } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(ModelError::invalid(
                        "production.delta",
                        format!("must lie in (0, 1), got {delta}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Marginal product of capital at capital ratio `k = K/H`.
    pub fn marginal_capital(&self, k: f64) -> Option<f64> {
        match *self {
            ProductionSpec::CobbDouglas { delta } => Some(delta * k.powf(delta - 1.0)),
            ProductionSpec::DirectWage { .. } => None,
        }
    }

    /// Marginal product of human capital at capital ratio `k = K/H`.
    pub fn marginal_labor(&self, k: f64) -> Option<f64> {
        match *self {
            ProductionSpec::CobbDouglas { delta } => Some((1.0 - delta) * k.powf(delta)),
            ProductionSpec::DirectWage { .. } => None,
        }
    }
}

/// Solves the firms' conditions for `(K, ω)` given the gross interest rate
/// and the stock of human capital. The interest rate pins `K/H`, which in
/// turn pins the wage.
pub fn solve_production(
    prod: &ProductionSpec,
    interest_rate: f64,
    human_capital: f64,
) -> Result<ProductionSolution> {
    prod.validate()?;
    if !(interest_rate.is_finite() && interest_rate > 0.0) {
        return Err(ModelError::invalid("economy.R", "must be positive"));
    }
    match *prod {
        ProductionSpec::DirectWage { wage } => Ok(ProductionSolution {
            capital: 0.0,
            wage,
            capital_ratio: None,
        }),
        ProductionSpec::CobbDouglas { delta } => {
            if !(human_capital.is_finite() && human_capital > 0.0) {
                return Err(ModelError::invalid(
                    "economy",
                    "human capital stock must be positive for Cobb-Douglas production",
                ));
            }
            let ratio = (delta / interest_rate).powf(1.0 / (1.0 - delta));
            Ok(ProductionSolution {
                capital: ratio * human_capital,
                wage: (1.0 - delta) * ratio.powf(delta),
                capital_ratio: Some(ratio),
            })
        }
    }
}
