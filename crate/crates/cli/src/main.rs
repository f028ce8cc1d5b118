use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use loanmix_cli::commands::{self, Figure, Report};
use loanmix_cli::error::{EXIT_INVALID, EXIT_OK};
use loanmix_cli::scenario::{self, SCENARIO_DIR_ENV};
use loanmix_cli::CliError;
use loanmix_core::Regime;

/// Equilibria of mixed CML/ICL student-loan portfolios.
///
/// SCENARIO is a TOML file path, or a name looked up in $LOANMIX_SCENARIO_DIR.
/// Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 oracle breach.
#[derive(Parser)]
#[command(name = "loanmix", version, about, long_about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    /// Portfolio regime: any CML share in [0, 1].
    Pr,
    /// Funding-diversity equilibrium: CML or ICL only.
    Fde,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Pr => Regime::Portfolio,
            RegimeArg::Fde => Regime::FundingDiversity,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Fig1,
    Fig2a,
    Fig2b,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the break-even equilibrium and write a JSON report.
    Solve {
        scenario: String,
        #[arg(long, value_enum, default_value = "pr")]
        regime: RegimeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare expected utilities under both regimes (JSON).
    Compare {
        scenario: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Share profiles as CSV.
    Figure {
        scenario: String,
        #[arg(value_enum)]
        which: FigureArg,
        /// Basic capital of the second fig2b panel (default A + 1).
        #[arg(long)]
        a1: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Comparative statics of the PR equilibrium as long-format CSV.
    Sweep {
        scenario: String,
        /// beta_over_alpha, A or sigma2.
        #[arg(long)]
        param: String,
        /// Strictly increasing, comma-separated.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check shares and break-even against brute force (JSON).
    Oracle {
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
        inject_abar_offset: f64,
    },
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, &report.body)?,
        None => std::io::stdout().write_all(report.body.as_bytes())?,
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (report, out) = match cli.command {
        Command::Solve {
            scenario,
            regime,
            out,
        } => (commands::solve(&scenario::load(&scenario)?, regime.into())?, out),
        Command::Compare { scenario, out } => (commands::compare(&scenario::load(&scenario)?)?, out),
        Command::Figure {
            scenario,
            which,
            a1,
            out,
        } => {
            let which = match which {
                FigureArg::Fig1 => Figure::Fig1,
                FigureArg::Fig2a => Figure::Fig2a,
                FigureArg::Fig2b => Figure::Fig2b,
            };
            (commands::figure(&scenario::load(&scenario)?, which, a1)?, out)
        }
        Command::Sweep {
            scenario,
            param,
            values,
            out,
        } => (
            commands::sweep(&scenario::load(&scenario)?, &param, &values)?,
            out,
        ),
        Command::Oracle {
            scenario,
            seed,
            samples,
            out,
            inject_abar_offset,
        } => {
            let s = scenario::load(&scenario)?;
            let mut cfg = s.oracle;
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.samples = samples.unwrap_or(cfg.samples);
            (commands::oracle(&s, &cfg, inject_abar_offset)?, out)
        }
    };
    emit(&report, out.as_ref())?;
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    // clap exits 2 on usage errors, which the exit-code contract reserves
    // for solver failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {}", e.message());
            if matches!(e, CliError::Invalid(_)) && e.message().contains("not found") {
                eprintln!("hint: set {SCENARIO_DIR_ENV} to a directory of scenario files");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
