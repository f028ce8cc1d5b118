//! Equilibrium solver for student-loan portfolios that mix credit-market
//! loans (CML, fixed repayment `R`) with income-contingent loans (ICL,
//! repayment `R·a/ā` proportional to realized ability).
//!
//! * [`economy`]: scenario data and the consumption identity.
//! * [`choice`]: each signal group's optimal CML share and cutoff signals.
//! * [`equilibrium`]: the break-even fixed point for `ā`, regime comparison
//!   and comparative statics.
//! * [`oracle`]: grid-search and Monte-Carlo cross-checks.

pub mod choice;
pub mod economy;
pub mod equilibrium;
mod error;
pub mod oracle;
pub mod reference;

pub use choice::{
    classify_sets, cutoff_report, indifference_signals, level_set_roots, ChoiceContext,
    CutoffMethod, CutoffReport, FocTerms, QuadraticConstants, SetPartition, ShareChoice,
    ThetaProfile,
};
pub use economy::{
    human_capital_stock, solve_production, EconomyParams, Education, LoanTerms, NoiseKind,
    NoiseNode, NoiseSpec, ProductionSolution, ProductionSpec, Scaled, SignalGrid, SignalNode,
    Utility, UtilitySpec, EDUCATION_COST,
};
pub use equilibrium::{
    assumption_checks, break_even_residual, compare_regimes, comparative_static_sweep,
    pool_mean, probe_fixed_points, solve_fixed_point, solve_fixed_point_with, solve_with_utility,
    AssumptionReport, Equilibrium, IterationRecord, Regime, SolverOptions, Sweep, SweepParam,
    WelfareReport,
};
pub use error::{ModelError, Result};
pub use oracle::{
    grid_search_share, monte_carlo_break_even, monte_carlo_expected_utility, Estimate,
    OracleConfig,
};
