//! Scenario data: signals, ability noise, preferences, production and the
//! consumption identity that ties them together.

mod grid;
mod noise;
mod production;
mod utility;

pub use grid::{SignalGrid, SignalNode, DEFAULT_GRID_NODES};
pub use noise::{NoiseKind, NoiseNode, NoiseSpec};
pub use production::{solve_production, ProductionSolution, ProductionSpec};
pub use utility::{Scaled, Utility, UtilitySpec};

use serde::Serialize;

use crate::error::{ModelError, Result};

/// The cost of higher education. Every loan amount is expressed in units of it.
pub const EDUCATION_COST: f64 = 1.0;

/// Education decision of a signal group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Education {
    /// Stays at basic human capital `A` and takes no loan.
    Basic,
    /// Invests in higher education, funded by a CML/ICL portfolio.
    Higher,
}

/// Prices faced by a borrower: the ICL pool mean ability and the wage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoanTerms {
    pub pool_mean: f64,
    pub wage: f64,
}

/// A complete, validated scenario.
///
/// Construction validates every invariant; the value is immutable afterwards
/// (use the `with_*` methods to derive modified scenarios).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconomyParams {
    interest_rate: f64,
    basic_capital: f64,
    grid: SignalGrid,
    noise: NoiseSpec,
    utility: UtilitySpec,
    production: ProductionSpec,
    #[serde(skip)]
    noise_nodes: Vec<NoiseNode>,
}

impl EconomyParams {
    pub fn new(
        interest_rate: f64,
        basic_capital: f64,
        grid: SignalGrid,
        noise: NoiseSpec,
        utility: UtilitySpec,
        production: ProductionSpec,
    ) -> Result<Self> {
        if !(interest_rate.is_finite() && interest_rate > 0.0) {
            return Err(ModelError::invalid(
                "economy.R",
                format!("gross interest rate must be positive, got {interest_rate}"),
            ));
        }
        if !(basic_capital.is_finite() && basic_capital >= 0.0) {
            return Err(ModelError::invalid(
                "economy.A",
                format!("basic human capital must be nonnegative, got {basic_capital}"),
            ));
        }
        utility.validate()?;
        production.validate()?;
        let noise_nodes = noise.nodes()?;
        let lowest_eps = noise_nodes.iter().map(|n| n.eps).fold(0.0, f64::min);
        let lowest_ability = grid.lower() + lowest_eps;
        if lowest_ability < 0.0 {
            return Err(ModelError::invalid(
                "noise.sigma",
                format!(
                    "lowest ability y1 + min(eps) = {lowest_ability} is negative; \
                     abilities must be nonnegative"
                ),
            ));
        }
        Ok(EconomyParams {
            interest_rate,
            basic_capital,
            grid,
            noise,
            utility,
            production,
            noise_nodes,
        })
    }

    pub fn interest_rate(&self) -> f64 {
        self.interest_rate
    }

    pub fn basic_capital(&self) -> f64 {
        self.basic_capital
    }

    pub fn grid(&self) -> &SignalGrid {
        &self.grid
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn noise_nodes(&self) -> &[NoiseNode] {
        &self.noise_nodes
    }

    pub fn utility(&self) -> &UtilitySpec {
        &self.utility
    }

    pub fn production(&self) -> &ProductionSpec {
        &self.production
    }

    /// Support of abilities `[a¹, a²]` implied by the grid and the noise nodes.
    pub fn ability_support(&self) -> (f64, f64) {
        let lo = self.noise_nodes.iter().map(|n| n.eps).fold(0.0, f64::min);
        let hi = self.noise_nodes.iter().map(|n| n.eps).fold(0.0, f64::max);
        (self.grid.lower() + lo, self.grid.upper() + hi)
    }

    pub fn with_basic_capital(&self, basic_capital: f64) -> Result<Self> {
        Self::new(
            self.interest_rate,
            basic_capital,
            self.grid.clone(),
            self.noise,
            self.utility,
            self.production,
        )
    }

    pub fn with_noise(&self, noise: NoiseSpec) -> Result<Self> {
        Self::new(
            self.interest_rate,
            self.basic_capital,
            self.grid.clone(),
            noise,
            self.utility,
            self.production,
        )
    }

    pub fn with_utility(&self, utility: UtilitySpec) -> Result<Self> {
        Self::new(
            self.interest_rate,
            self.basic_capital,
            self.grid.clone(),
            self.noise,
            utility,
            self.production,
        )
    }

    pub fn with_grid(&self, grid: SignalGrid) -> Result<Self> {
        Self::new(
            self.interest_rate,
            self.basic_capital,
            grid,
            self.noise,
            self.utility,
            self.production,
        )
    }

    pub fn with_production(&self, production: ProductionSpec) -> Result<Self> {
        Self::new(
            self.interest_rate,
            self.basic_capital,
            self.grid.clone(),
            self.noise,
            self.utility,
            production,
        )
    }

    /// Stock of human capital `H = A + E[a]`, with every group investing.
    pub fn human_capital_stock(&self) -> f64 {
        self.basic_capital + self.grid.mean()
    }

    /// Factor prices from the interest rate and the human-capital stock.
    pub fn solve_production(&self) -> Result<ProductionSolution> {
        solve_production(
            &self.production,
            self.interest_rate,
            self.human_capital_stock(),
        )
    }

    /// Adult consumption of a member of signal group `y` whose noise
    /// realization is `eps`, holding CML share `theta`.
    ///
    /// With higher education the borrower earns `(A + y + ε)ω` and repays
    /// `θR + (1-θ)R(y+ε)/ā`. Under CRRA utility a non-positive result is a
    /// domain error naming `(y, ε)`.
    pub fn consumption(
        &self,
        education: Education,
        y: f64,
        eps: f64,
        theta: f64,
        terms: LoanTerms,
    ) -> Result<f64> {
        let a = self.basic_capital;
        let w = terms.wage;
        let c = match education {
            Education::Basic => a * w,
            Education::Higher => {
                let ability = y + eps;
                let r = self.interest_rate * EDUCATION_COST;
                (a + ability) * w - (theta * r + (1.0 - theta) * r * ability / terms.pool_mean)
            }
        };
        if matches!(self.utility, UtilitySpec::Crra { .. }) && c <= 0.0 {
            return Err(ModelError::NonPositiveConsumption { consumption: c }.at(y, eps));
        }
        Ok(c)
    }
}

/// `H = A + Σ w_i y_i`.
pub fn human_capital_stock(params: &EconomyParams) -> f64 {
    params.human_capital_stock()
}
