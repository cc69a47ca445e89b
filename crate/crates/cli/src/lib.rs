//! Command-line front end: parses a scenario, runs one solver and renders
//! its artifact as CSV or JSON.

pub mod json;
pub mod scenario;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use harvest_core::game::{self, Depletion};
use harvest_core::model::round_schedule;
use harvest_core::nondurable::{self, RevenueRow, RevenueTable, Variant};
use harvest_core::{durable, limitp, optctrl, Exec};

use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "harvest", version, about = "Spatial resource harvesting solvers")]
pub struct Cli {
    /// Scenario file (TOML). Flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for Monte Carlo runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 runs every loop sequentially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DepletionArg {
    Own,
    Aggregate,
}

impl From<DepletionArg> for Depletion {
    fn from(d: DepletionArg) -> Self {
        match d {
            DepletionArg::Own => Depletion::Own,
            DepletionArg::Aggregate => Depletion::Aggregate,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Revenue of one constant share.
    NondurableEval {
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Use the spatial simulation with this many cells.
        #[arg(long)]
        locations: Option<usize>,
    },
    /// Revenue-maximizing constant share for one round time.
    NondurableOptimize {
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Revenue on a (round time, share) grid.
    Sweep {
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        thetas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        locations: Option<usize>,
    },
    /// Optimal share path by forward-backward sweep.
    ControlSolve {
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Durable-good monopoly shares.
    DurableSolve {
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<f64>>,
        #[arg(long)]
        rounds: Option<usize>,
    },
    /// Nash equilibrium of the harvesting game.
    GameSolve {
        #[arg(long)]
        players: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        depletion: Option<DepletionArg>,
    },
    /// Closed-form two-round equilibria over a range of player counts.
    GameClosedForm {
        #[arg(long)]
        from: Option<usize>,
        #[arg(long)]
        to: Option<usize>,
    },
    /// Detectability of one deviator under price noise.
    LimitDetect {
        #[arg(long, value_delimiter = ',')]
        players: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        variance: Option<f64>,
    },
    /// Largest discount rate that sustains collusion.
    LimitDiscount {
        #[arg(long)]
        players: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<f64>>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
}

/// Rendered output of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub body: String,
    /// Human-readable summary for the error stream.
    pub notes: Vec<String>,
    /// Set when the solver stopped without converging; the body still holds
    /// the last iterate.
    pub unconverged: bool,
}

impl Artifact {
    fn done(body: String, notes: Vec<String>) -> Self {
        Self {
            body,
            notes,
            unconverged: false,
        }
    }
}

/// Exit status for an error: 2 when a solver gave up, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<harvest_core::Error>() {
        Some(harvest_core::Error::NonConvergence { .. }) => 2,
        _ => 1,
    }
}

/// Scenario after applying the global flags.
pub fn resolve_scenario(cli: &Cli) -> Result<Scenario> {
    let mut s = match &cli.config {
        Some(path) => Scenario::load(path)?,
        None => Scenario::default(),
    };
    if cli.seed.is_some() {
        s.output.seed = cli.seed;
    }
    if cli.out.is_some() {
        s.output.path = cli.out.clone();
    }
    if cli.threads.is_some() {
        s.output.threads = cli.threads;
    }
    if s.output.threads == Some(0) {
        bail!("--threads must be >= 1");
    }
    Ok(s)
}

pub fn exec_for(s: &Scenario) -> Exec {
    match s.output.threads {
        Some(1) => Exec::Sequential,
        _ => Exec::Parallel,
    }
}

fn revenue_csv(rows: Vec<RevenueRow>, s: &Scenario, variant: Variant) -> String {
    RevenueTable {
        rows,
        params: s.model,
        variant,
    }
    .to_csv()
}

pub fn execute(command: &Command, s: &Scenario) -> Result<Artifact> {
    let exec = exec_for(s);
    let model = s.model;
    match command {
        Command::NondurableEval {
            theta,
            alpha,
            locations,
        } => {
            let theta = theta.unwrap_or(model.round_time);
            let alpha = alpha.unwrap_or(s.nondurable.share);
            let variant = match locations {
                Some(l) => Variant::Oracle { locations: *l },
                None => s.nondurable.variant(),
            };
            let table = nondurable::sweep_objective_with(&[theta], &[alpha], &model, variant, exec)?;
            Ok(Artifact::done(table.to_csv(), vec![]))
        }
        Command::NondurableOptimize { theta } => {
            let theta = theta.unwrap_or(model.round_time);
            let best = nondurable::optimize_constant_share(theta, &model)?;
            let row = RevenueRow {
                theta,
                alpha: best.share,
                revenue: best.revenue,
            };
            let notes = vec![format!("optimal share {:.6} at round time {theta}", best.share)];
            Ok(Artifact::done(revenue_csv(vec![row], s, Variant::ClosedForm), notes))
        }
        Command::Sweep {
            thetas,
            alphas,
            locations,
        } => {
            let thetas = thetas.as_deref().unwrap_or(&s.nondurable.thetas);
            let alphas = alphas.as_deref().unwrap_or(&s.nondurable.alphas);
            let variant = match locations {
                Some(l) => Variant::Oracle { locations: *l },
                None => s.nondurable.variant(),
            };
            let table = nondurable::sweep_objective_with(thetas, alphas, &model, variant, exec)?;
            Ok(Artifact::done(table.to_csv(), vec![]))
        }
        Command::ControlSolve { steps } => {
            let mut settings = s.control;
            if let Some(m) = steps {
                settings.steps_per_round = *m;
            }
            let grid = round_schedule(&model, settings.steps_per_round)?;
            let sol = optctrl::solve_optimal_control(&model, &grid, &settings)?;
            let notes = vec![format!(
                "converged in {} iterations, residual {:e}, objective {:.12}",
                sol.diagnostics.iterations, sol.diagnostics.residual, sol.objective
            )];
            Ok(Artifact::done(sol.to_csv(), notes))
        }
        Command::DurableSolve { factors, rounds } => {
            let factors = match (factors, &s.durable.growth_factors) {
                (Some(f), _) | (None, Some(f)) => f.clone(),
                (None, None) => durable::growth_factors(rounds.unwrap_or(s.durable.rounds), &model)?,
            };
            let sol = durable::solve_monopoly(&factors, model.initial_stock, s.durable.tol)?;
            let mut body = durable::MonopolySolution::csv_header(factors.len());
            body.push('\n');
            body.push_str(&sol.csv_row());
            Ok(Artifact::done(body, vec![]))
        }
        Command::GameSolve {
            players,
            factors,
            depletion,
        } => {
            let mut config = s.game_or_default()?;
            if let Some(i) = players {
                config.players = *i;
            }
            if let Some(f) = factors {
                config.growth_factors = f.clone();
            }
            if let Some(d) = depletion {
                config.depletion = (*d).into();
            }
            let result = game::solve_nash_with(&config, &s.nash, exec)?;
            let notes = vec![format!(
                "{} after {} iterations, change {:e}, first-order residual {:e}",
                if result.converged { "converged" } else { "NOT converged" },
                result.iterations,
                result.change,
                result.foc_residual
            )];
            Ok(Artifact {
                body: json::to_string(&result)?,
                notes,
                unconverged: !result.converged,
            })
        }
        Command::GameClosedForm { from, to } => {
            let from = from.unwrap_or(s.closed_form.from);
            let to = to.unwrap_or(s.closed_form.to);
            if from == 0 || to < from {
                bail!(harvest_core::Error::Parameter(format!(
                    "invalid player range {from}..={to}"
                )));
            }
            let players: Vec<usize> = (from..=to).collect();
            let rows = game::closed_form_sweep(&players)?;
            Ok(Artifact::done(game::closed_form_csv(&rows), vec![]))
        }
        Command::LimitDetect {
            players,
            trials,
            variance,
        } => {
            let mut config = s.replica_or_default();
            if let Some(t) = trials {
                config.trials = *t;
            }
            if let Some(v) = variance {
                config.noise_variance = *v;
            }
            let grid = players.as_deref().unwrap_or(&s.detection.players);
            let game = replica_game(config.players, config.rounds, s.detection.growth_factors.as_deref())?;
            let report = limitp::detection_experiment_with(grid, &config, &game, exec)?;
            let notes = vec![format!(
                "shift slope {:.6}, noise slope {}",
                report.shift_slope,
                report.std_slope.map_or("n/a".to_string(), |v| format!("{v:.6}"))
            )];
            Ok(Artifact::done(report.to_csv(), notes))
        }
        Command::LimitDiscount {
            players,
            factors,
            lo,
            hi,
        } => {
            let mut config = s.replica_or_default();
            if let Some(i) = players {
                config.players = *i;
            }
            let factors = factors.as_deref().or(s.detection.growth_factors.as_deref());
            if let Some(f) = factors {
                config.rounds = f.len();
            }
            let game = replica_game(config.players, config.rounds, factors)?;
            let bracket = (lo.unwrap_or(s.detection.bracket.0), hi.unwrap_or(s.detection.bracket.1));
            let result = limitp::critical_discount(&config, &game, bracket)?;
            let notes = vec![format!("critical discount rate {:.10}", result.rho)];
            Ok(Artifact::done(json::to_string(&result)?, notes))
        }
    }
}

fn replica_game(players: usize, rounds: usize, factors: Option<&[f64]>) -> Result<game::GameConfig> {
    let factors = factors.map_or_else(|| vec![1.0; rounds], <[f64]>::to_vec);
    game::GameConfig::new(players.max(1), factors, 1.0).context("replica market")
}
