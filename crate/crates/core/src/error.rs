use thiserror::Error;

use crate::equilibrium::IterationRecord;

/// Errors raised by the model, the optimizers and the equilibrium solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("consumption {consumption} is outside the domain of CRRA utility (requires c > 0)")]
    NonPositiveConsumption { consumption: f64 },

    #[error("quadratic utility saturated: consumption {consumption} >= alpha/beta = {bliss}")]
    Saturation { consumption: f64, bliss: f64 },

    #[error("at signal y = {y}, noise = {noise}: {source}")]
    AtRealization {
        y: f64,
        noise: f64,
        source: Box<ModelError>,
    },

    #[error("operation requires {expected} utility")]
    WrongUtility { expected: &'static str },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("ICL pool is empty: every signal group holds CML only")]
    DegeneratePool,

    #[error("fixed point did not converge after {iterations} iterations (last pool mean {last})")]
    NonConvergence {
        iterations: usize,
        last: f64,
        trace: Vec<IterationRecord>,
    },

    #[error(
        "iteration stopped at pool mean {pool_mean} with |a - T(a)| = {fixed_point_residual:e} \
         and break-even residual {break_even_residual:e}"
    )]
    Stalled {
        pool_mean: f64,
        fixed_point_residual: f64,
        break_even_residual: f64,
    },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl ModelError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn at(self, y: f64, noise: f64) -> Self {
        ModelError::AtRealization {
            y,
            noise,
            source: Box::new(self),
        }
    }

    /// True when the solver ran but found no acceptable equilibrium.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            ModelError::NonConvergence { .. }
                | ModelError::Stalled { .. }
                | ModelError::DegeneratePool
                | ModelError::Internal(_)
        )
    }

    /// True for utility-domain failures (CRRA non-positive consumption or
    /// quadratic saturation), with or without realization context.
    pub fn is_domain_error(&self) -> bool {
        match self {
            ModelError::NonPositiveConsumption { .. } | ModelError::Saturation { .. } => true,
            ModelError::AtRealization { source, .. } => source.is_domain_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
