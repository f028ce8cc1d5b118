//! Scenario files: TOML documents that map one-to-one onto
//! [`EconomyParams`] plus solver and oracle settings.
//!
//! ```toml
//! [economy]
//! R = 1.2
//! A = 2.0
//!
//! [signals]
//! y1 = 1.0
//! y2 = 2.2
//! nodes = 241            # or: points = [[1.0, 0.5], [3.0, 0.5]]
//!
//! [noise]
//! kind = "two_point"     # or "gauss_hermite" with gh_nodes = 9
//! sigma = 0.9
//!
//! [utility]
//! family = "quadratic"   # "crra" (gamma) or "cara" (lambda)
//! alpha = 4.0
//! beta = 0.5
//!
//! [production]
//! kind = "direct"        # or "cobb_douglas" with delta
//! wage = 1.5
//!
//! [solver]               # optional
//! damping = 0.5
//! tol = 1e-12
//! max_iter = 10000
//!
//! [oracle]               # optional
//! seed = 20240917
//! samples = 1000000
//! grid_points = 10001
//! ```

use std::path::{Path, PathBuf};

use loanmix_core::{
    EconomyParams, ModelError, NoiseKind, NoiseSpec, OracleConfig, ProductionSpec, SignalGrid,
    SolverOptions, UtilitySpec,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Environment variable naming the directory searched for scenario names.
pub const SCENARIO_DIR_ENV: &str = "LOANMIX_SCENARIO_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub economy: EconomySection,
    pub signals: SignalsSection,
    pub noise: NoiseSection,
    pub utility: UtilitySection,
    pub production: ProductionSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySection {
    #[serde(rename = "R")]
    pub interest_rate: f64,
    #[serde(rename = "A")]
    pub basic_capital: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Explicit `[y, weight]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKindName {
    TwoPoint,
    GaussHermite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub kind: NoiseKindName,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gh_nodes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySection {
    Crra { gamma: f64 },
    Cara { lambda: f64 },
    Quadratic { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProductionSection {
    Direct { wage: f64 },
    CobbDouglas { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

/// A parsed and validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: EconomyParams,
    pub solver: SolverOptions,
    pub oracle: OracleConfig,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Invalid(format!("scenario file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario sections serialize to TOML")
    }

    /// File contents describing `params` with the given settings.
    pub fn from_parts(params: &EconomyParams, solver: &SolverOptions, oracle: &OracleConfig) -> Self {
        let grid = params.grid();
        let signals = SignalsSection {
            y1: None,
            y2: None,
            nodes: None,
            points: Some(grid.nodes().iter().map(|n| [n.y, n.weight]).collect()),
        };
        let noise = params.noise();
        let (kind, gh_nodes) = match noise.kind {
            NoiseKind::TwoPoint => (NoiseKindName::TwoPoint, None),
            NoiseKind::GaussHermite { nodes } => (NoiseKindName::GaussHermite, Some(nodes)),
        };
        ScenarioFile {
            economy: EconomySection {
                interest_rate: params.interest_rate(),
                basic_capital: params.basic_capital(),
            },
            signals,
            noise: NoiseSection {
                kind,
                sigma: noise.sigma,
                gh_nodes,
            },
            utility: match *params.utility() {
                UtilitySpec::Crra { gamma } => UtilitySection::Crra { gamma },
                UtilitySpec::Cara { lambda } => UtilitySection::Cara { lambda },
                UtilitySpec::Quadratic { alpha, beta } => UtilitySection::Quadratic { alpha, beta },
            },
            production: match *params.production() {
                ProductionSpec::DirectWage { wage } => ProductionSection::Direct { wage },
                ProductionSpec::CobbDouglas { delta } => ProductionSection::CobbDouglas { delta },
            },
            solver: Some(SolverSection {
                damping: Some(solver.damping),
                tol: Some(solver.tolerance),
                max_iter: Some(solver.max_iterations),
            }),
            oracle: Some(OracleSection {
                seed: Some(oracle.seed),
                samples: Some(oracle.samples),
                grid_points: Some(oracle.grid_points),
            }),
        }
    }

    fn grid(&self) -> Result<SignalGrid, CliError> {
        let s = &self.signals;
        match (&s.points, s.y1, s.y2, s.nodes) {
            (Some(points), None, None, None) => {
                let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
                Ok(SignalGrid::from_points(&pairs)?)
            }
            (None, Some(y1), Some(y2), nodes) => Ok(SignalGrid::uniform(
                y1,
                y2,
                nodes.unwrap_or(loanmix_core::economy::DEFAULT_GRID_NODES),
            )?),
            (Some(_), ..) => Err(CliError::Invalid(
                "signals: give either `points` or `y1`/`y2`/`nodes`, not both".into(),
            )),
            _ => Err(CliError::Invalid(
                "signals: `y1` and `y2` are required when `points` is absent".into(),
            )),
        }
    }

    fn noise(&self) -> Result<NoiseSpec, CliError> {
        let n = &self.noise;
        match (n.kind, n.gh_nodes) {
            (NoiseKindName::TwoPoint, None) => Ok(NoiseSpec::two_point(n.sigma)),
            (NoiseKindName::TwoPoint, Some(_)) => Err(CliError::Invalid(
                "noise.gh_nodes: only valid with kind = \"gauss_hermite\"".into(),
            )),
            (NoiseKindName::GaussHermite, Some(nodes)) => Ok(NoiseSpec::gauss_hermite(nodes, n.sigma)),
            (NoiseKindName::GaussHermite, None) => Err(CliError::Invalid(
                "noise.gh_nodes: required with kind = \"gauss_hermite\"".into(),
            )),
        }
    }

    pub fn params(&self) -> Result<EconomyParams, CliError> {
        let utility = match self.utility {
            UtilitySection::Crra { gamma } => UtilitySpec::Crra { gamma },
            UtilitySection::Cara { lambda } => UtilitySpec::Cara { lambda },
            UtilitySection::Quadratic { alpha, beta } => UtilitySpec::Quadratic { alpha, beta },
        };
        let production = match self.production {
            ProductionSection::Direct { wage } => ProductionSpec::DirectWage { wage },
            ProductionSection::CobbDouglas { delta } => ProductionSpec::CobbDouglas { delta },
        };
        Ok(EconomyParams::new(
            self.economy.interest_rate,
            self.economy.basic_capital,
            self.grid()?,
            self.noise()?,
            utility,
            production,
        )?)
    }

    pub fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let mut opts = SolverOptions::default();
        if let Some(s) = self.solver {
            opts.damping = s.damping.unwrap_or(opts.damping);
            opts.tolerance = s.tol.unwrap_or(opts.tolerance);
            opts.max_iterations = s.max_iter.unwrap_or(opts.max_iterations);
        }
        opts.validate()?;
        Ok(opts)
    }

    pub fn oracle_config(&self) -> Result<OracleConfig, CliError> {
        let mut cfg = OracleConfig::default();
        if let Some(o) = self.oracle {
            cfg.seed = o.seed.unwrap_or(cfg.seed);
            cfg.samples = o.samples.unwrap_or(cfg.samples);
            cfg.grid_points = o.grid_points.unwrap_or(cfg.grid_points);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn into_scenario(self, name: impl Into<String>) -> Result<Scenario, CliError> {
        Ok(Scenario {
            name: name.into(),
            params: self.params()?,
            solver: self.solver_options()?,
            oracle: self.oracle_config()?,
        })
    }
}

/// Finds a scenario: an existing path, then `<name>` or `<name>.toml` in
/// the directory named by [`SCENARIO_DIR_ENV`].
pub fn resolve(spec: &str) -> Result<PathBuf, CliError> {
    let direct = Path::new(spec);
    if direct.is_file() {
        return Ok(direct.to_path_buf());
    }
    if let Some(dir) = std::env::var_os(SCENARIO_DIR_ENV) {
        let dir = PathBuf::from(dir);
        for candidate in [dir.join(spec), dir.join(format!("{spec}.toml"))] {
            if candidate.is_file() {
                return Ok(candidate);
            }
        }
    }
    Err(CliError::Invalid(format!(
        "scenario `{spec}` not found (checked the path and ${SCENARIO_DIR_ENV})"
    )))
}

pub fn load(spec: &str) -> Result<Scenario, CliError> {
    let path = resolve(spec)?;
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let file = ScenarioFile::parse(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {}", path.display(), e.message())))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    file.into_scenario(name).map_err(|e| match e {
        CliError::Model(m) => CliError::Invalid(format!("{}: {m}", path.display())),
        other => other,
    })
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}
