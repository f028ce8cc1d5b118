//! Built-in reference scenarios.
//!
//! All four share `R = 1.2`, a direct wage `ω = 1.5`, 241 equally weighted
//! signals on `[1.0, 2.2]` and two-point noise with `σ = 0.9`.

use crate::economy::{EconomyParams, NoiseSpec, ProductionSpec, SignalGrid, UtilitySpec};

pub const INTEREST_RATE: f64 = 1.2;
pub const BASIC_CAPITAL: f64 = 2.0;
/// Basic capital of the affluent variant, high enough that nobody holds
/// CML only.
pub const AFFLUENT_BASIC_CAPITAL: f64 = 3.0;
pub const WAGE: f64 = 1.5;
pub const SIGNAL_LOWER: f64 = 1.0;
pub const SIGNAL_UPPER: f64 = 2.2;
pub const GRID_NODES: usize = 241;
pub const SIGMA: f64 = 0.9;

pub const QUADRATIC: UtilitySpec = UtilitySpec::Quadratic {
    alpha: 4.0,
    beta: 0.5,
};
pub const CRRA: UtilitySpec = UtilitySpec::Crra { gamma: 2.0 };
pub const CARA: UtilitySpec = UtilitySpec::Cara { lambda: 0.5 };

fn build(basic_capital: f64, utility: UtilitySpec) -> EconomyParams {
    EconomyParams::new(
        INTEREST_RATE,
        basic_capital,
        SignalGrid::uniform(SIGNAL_LOWER, SIGNAL_UPPER, GRID_NODES)
            .expect("reference grid is valid"),
        NoiseSpec::two_point(SIGMA),
        utility,
        ProductionSpec::DirectWage { wage: WAGE },
    )
    .expect("reference scenario is valid")
}

pub fn quadratic() -> EconomyParams {
    build(BASIC_CAPITAL, QUADRATIC)
}

pub fn crra() -> EconomyParams {
    build(BASIC_CAPITAL, CRRA)
}

pub fn cara() -> EconomyParams {
    build(BASIC_CAPITAL, CARA)
}

pub fn quadratic_affluent() -> EconomyParams {
    build(AFFLUENT_BASIC_CAPITAL, QUADRATIC)
}

/// Scenario by name: `quadratic`, `crra`, `cara` or `quadratic_affluent`.
pub fn by_name(name: &str) -> Option<EconomyParams> {
    match name {
        "quadratic" => Some(quadratic()),
        "crra" => Some(crra()),
        "cara" => Some(cara()),
        "quadratic_affluent" => Some(quadratic_affluent()),
        _ => None,
    }
}

/// The three scenarios with basic capital `A = 2`.
pub fn all() -> Vec<(&'static str, EconomyParams)> {
    vec![
        ("quadratic", quadratic()),
        ("crra", crra()),
        ("cara", cara()),
    ]
}
