//! `I` sellers sharing the durable-good market over `N` rounds.
//!
//! Player `i` earns
//!
//! ```text
//! u_i = y₀ Σ_n α_{i,n} (1 − Σ_j Σ_{y≤n} α_{j,y}) F_n Π_{y<n} (1 − d_{i,y})
//! ```
//!
//! where the price falls with everybody's cumulative supply. The depletion
//! term `d_{i,y}` is the player's own share by default, which is the
//! convention that reproduces the two-round closed form below. The
//! [`Depletion::Aggregate`] variant uses the total harvest of the round.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{f17, push_row};
use crate::par::{self, Exec};
use crate::simplex::{kkt_residual, maximize_row, MaximizeOptions, RowMaximum, RowPayoff};

const K_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Depletion {
    #[default]
    Own,
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub players: usize,
    pub growth_factors: Vec<f64>,
    #[serde(default = "unit")]
    pub y0: f64,
    #[serde(default)]
    pub depletion: Depletion,
}

fn unit() -> f64 {
    1.0
}

impl GameConfig {
    pub fn new(players: usize, growth_factors: Vec<f64>, y0: f64) -> Result<Self> {
        let c = Self {
            players,
            growth_factors,
            y0,
            depletion: Depletion::Own,
        };
        c.validate()?;
        Ok(c)
    }

    /// The two-round market with factors `(1, 11/9)`.
    pub fn two_round(players: usize) -> Result<Self> {
        Self::new(players, vec![1.0, 11.0 / 9.0], 1.0)
    }

    pub fn with_depletion(mut self, depletion: Depletion) -> Self {
        self.depletion = depletion;
        self
    }

    pub fn rounds(&self) -> usize {
        self.growth_factors.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.players == 0 {
            return Err(Error::param("at least one player is required"));
        }
        if self.growth_factors.is_empty() {
            return Err(Error::param("at least one round is required"));
        }
        if self.growth_factors.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
            return Err(Error::param("growth factors must be positive and finite"));
        }
        if !(self.y0 >= 0.0) || !self.y0.is_finite() {
            return Err(Error::param(format!("initial stock must be >= 0, got {}", self.y0)));
        }
        Ok(())
    }
}

/// `I × N` matrix of shares, one row per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub shares: Vec<Vec<f64>>,
}

impl StrategyProfile {
    pub fn new(shares: Vec<Vec<f64>>) -> Result<Self> {
        let p = Self { shares };
        p.validate()?;
        Ok(p)
    }

    pub fn symmetric(players: usize, row: &[f64]) -> Result<Self> {
        Self::new(vec![row.to_vec(); players])
    }

    pub fn players(&self) -> usize {
        self.shares.len()
    }

    pub fn total(&self) -> f64 {
        self.shares.iter().flatten().sum()
    }

    fn validate(&self) -> Result<()> {
        let n = self.shares.first().map_or(0, Vec::len);
        if n == 0 || self.shares.iter().any(|r| r.len() != n) {
            return Err(Error::param("profile must be a non-empty rectangular matrix"));
        }
        if self.shares.iter().flatten().any(|a| !(*a >= 0.0)) {
            return Err(Error::domain("shares must be non-negative"));
        }
        if self.total() > 1.0 + K_SLACK {
            return Err(Error::domain(format!("aggregate supply {} exceeds 1", self.total())));
        }
        Ok(())
    }

    fn check_against(&self, config: &GameConfig) -> Result<()> {
        config.validate()?;
        self.validate()?;
        if self.players() != config.players || self.shares[0].len() != config.rounds() {
            return Err(Error::param(format!(
                "profile is {}x{}, game is {}x{}",
                self.players(),
                self.shares[0].len(),
                config.players,
                config.rounds()
            )));
        }
        Ok(())
    }
}

/// Player `i`'s payoff as a function of their own row, others held fixed.
fn row_payoff(i: usize, profile: &StrategyProfile, config: &GameConfig) -> RowPayoff {
    let n_rounds = config.rounds();
    let mut demand = vec![1.0; n_rounds];
    let mut drain = vec![0.0; n_rounds];
    let mut cum = 0.0;
    for n in 0..n_rounds {
        let others: f64 = (0..profile.players())
            .filter(|&j| j != i)
            .map(|j| profile.shares[j][n])
            .sum();
        cum += others;
        demand[n] = 1.0 - cum;
        if config.depletion == Depletion::Aggregate {
            drain[n] = others;
        }
    }
    RowPayoff {
        demand,
        slope: 1.0,
        factors: config.growth_factors.clone(),
        drain,
        scale: config.y0,
    }
}

fn others_total(i: usize, profile: &StrategyProfile) -> f64 {
    (0..profile.players())
        .filter(|&j| j != i)
        .map(|j| profile.shares[j].iter().sum::<f64>())
        .sum()
}

pub fn game_payoff(i: usize, profile: &StrategyProfile, config: &GameConfig) -> Result<f64> {
    profile.check_against(config)?;
    if i >= config.players {
        return Err(Error::param(format!("player {i} out of range")));
    }
    Ok(row_payoff(i, profile, config).value(&profile.shares[i]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub row: Vec<f64>,
    pub payoff: f64,
    pub residual: f64,
    /// No room is left under the aggregate cap, or the maximizer sits on its
    /// boundary.
    pub boundary: bool,
}

fn respond(i: usize, profile: &StrategyProfile, config: &GameConfig) -> BestResponse {
    let payoff = row_payoff(i, profile, config);
    let cap = (1.0 - others_total(i, profile)).max(0.0);
    let n = config.rounds();
    if cap <= K_SLACK {
        let row = vec![0.0; n];
        return BestResponse {
            payoff: payoff.value(&row),
            residual: 0.0,
            row,
            boundary: true,
        };
    }
    let starts = [
        profile.shares[i].clone(),
        vec![cap / (n as f64 + 1.0); n],
        (0..n).map(|k| cap / ((k + 2) as f64 * 2.0)).collect(),
    ];
    let RowMaximum { x, value, residual } = maximize_row(&payoff, cap, &starts, MaximizeOptions::default());
    let boundary = x.iter().any(|&a| a <= K_SLACK) || x.iter().sum::<f64>() >= cap - K_SLACK;
    BestResponse {
        row: x,
        payoff: value,
        residual,
        boundary,
    }
}

/// Maximizer of player `i`'s payoff over their row, subject to the
/// aggregate supply staying at most 1. Only the other rows of `profile`
/// matter.
pub fn best_response(i: usize, profile: &StrategyProfile, config: &GameConfig) -> Result<BestResponse> {
    profile.check_against(config)?;
    if i >= config.players {
        return Err(Error::param(format!("player {i} out of range")));
    }
    Ok(respond(i, profile, config))
}

/// Largest projected first-order residual over all players.
pub fn foc_residual(profile: &StrategyProfile, config: &GameConfig) -> Result<f64> {
    profile.check_against(config)?;
    Ok((0..config.players)
        .map(|i| {
            let p = row_payoff(i, profile, config);
            let cap = (1.0 - others_total(i, profile)).max(0.0);
            kkt_residual(&profile.shares[i], &p.gradient(&profile.shares[i]), cap)
        })
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NashSettings {
    pub damping: f64,
    pub tol: f64,
    pub foc_tol: f64,
    pub max_iter: usize,
}

impl Default for NashSettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-12,
            foc_tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    pub payoffs: Vec<f64>,
    pub limit_price: f64,
    pub final_stock: f64,
    pub foc_residual: f64,
    pub change: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Damped simultaneous best responses from the symmetric seed
/// `1/(IN + 1)`.
///
/// The step is capped at `2/(I + 1)`: the undamped map overshoots by a
/// factor that grows with the number of opponents. If the change grows for
/// three iterations in a row the step is halved. A run that stalls is
/// reported with `converged = false`.
pub fn solve_nash(config: &GameConfig, settings: &NashSettings) -> Result<EquilibriumResult> {
    solve_nash_with(config, settings, Exec::default())
}

pub fn solve_nash_with(config: &GameConfig, settings: &NashSettings, exec: Exec) -> Result<EquilibriumResult> {
    config.validate()?;
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(Error::param(format!(
            "damping must lie in (0, 1], got {}",
            settings.damping
        )));
    }
    if !(settings.tol > 0.0) || !(settings.foc_tol > 0.0) {
        return Err(Error::param("tolerances must be > 0"));
    }
    let i_count = config.players;
    let n = config.rounds();
    let seed = 1.0 / (i_count as f64 * n as f64 + 1.0);
    let mut profile = StrategyProfile::new(vec![vec![seed; n]; i_count])?;
    let mut step = settings.damping.min(2.0 / (i_count as f64 + 1.0));
    let mut change = f64::INFINITY;
    let mut growing = 0;
    let mut iterations = 0;

    while iterations < settings.max_iter {
        iterations += 1;
        let snapshot = &profile;
        let replies = par::map_indexed(exec, i_count, |i| respond(i, snapshot, config).row);
        let mut next: Vec<Vec<f64>> = profile
            .shares
            .iter()
            .zip(&replies)
            .map(|(a, b)| a.iter().zip(b).map(|(a, b)| (a + step * (b - a)).max(0.0)).collect())
            .collect();
        // damped rows can overshoot the aggregate cap by rounding
        let total: f64 = next.iter().flatten().sum();
        if total > 1.0 {
            next.iter_mut().flatten().for_each(|a| *a /= total);
        }
        let new_change = profile
            .shares
            .iter()
            .flatten()
            .zip(next.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        growing = if new_change > change { growing + 1 } else { 0 };
        if growing >= 3 {
            step *= 0.5;
            growing = 0;
        }
        change = new_change;
        profile = StrategyProfile { shares: next };
        if change < settings.tol {
            break;
        }
    }

    let foc = foc_residual(&profile, config)?;
    let payoffs = (0..i_count)
        .map(|i| game_payoff(i, &profile, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumResult {
        limit_price: limit_price(&profile),
        final_stock: final_stock(&profile, config.y0),
        converged: change < settings.tol && foc <= settings.foc_tol,
        foc_residual: foc,
        change,
        iterations,
        payoffs,
        profile,
    })
}

/// Symmetric equilibrium of the two-round market with factors `(1, 11/9)`.
pub fn two_round_equilibrium_closed(players: usize) -> Result<(f64, f64)> {
    if players == 0 {
        return Err(Error::domain("at least one player is required"));
    }
    let i = players as f64;
    let a = 9.0 * i * i + 7.0 * i + 20.0;
    let s = (81.0 * i.powi(4) + 126.0 * i.powi(3) + 409.0 * i * i - 512.0 * i + 4.0).sqrt();
    // a − s = 396(2I + 1)/(a + s), which avoids cancelling for large I
    let a2 = 18.0 / (a + s);
    let a1 = (1.0 - (i + 1.0) * a2) / i;
    Ok((a1, a2))
}

/// Symmetric per-round share predicted for negligible growth.
pub fn symmetric_slow_growth_share(players: usize, rounds: usize) -> Result<f64> {
    if players == 0 || rounds == 0 {
        return Err(Error::param("players and rounds must be >= 1"));
    }
    Ok(1.0 / (players as f64 * (rounds as f64 - 1.0) + 2.0))
}

/// Price left after all supply: `1 − Σ_i Σ_n α_{i,n}`.
pub fn limit_price(profile: &StrategyProfile) -> f64 {
    1.0 - profile.total()
}

/// Stock fraction surviving all rounds of harvesting, times `y₀` (growth
/// excluded).
pub fn final_stock(profile: &StrategyProfile, y0: f64) -> f64 {
    let n = profile.shares.first().map_or(0, Vec::len);
    y0 * (0..n)
        .map(|k| 1.0 - profile.shares.iter().map(|r| r[k]).sum::<f64>())
        .product::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRow {
    pub players: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub payoff: f64,
    pub limit_price: f64,
    pub final_stock: f64,
}

/// Closed-form two-round equilibrium for each player count.
pub fn closed_form_sweep(players: &[usize]) -> Result<Vec<ClosedFormRow>> {
    if players.is_empty() {
        return Err(Error::param("player grid must be non-empty"));
    }
    players
        .iter()
        .map(|&i| {
            let (a1, a2) = two_round_equilibrium_closed(i)?;
            let config = GameConfig::two_round(i)?;
            let profile = StrategyProfile::symmetric(i, &[a1, a2])?;
            Ok(ClosedFormRow {
                players: i,
                alpha1: a1,
                alpha2: a2,
                payoff: game_payoff(0, &profile, &config)?,
                limit_price: limit_price(&profile),
                final_stock: final_stock(&profile, 1.0),
            })
        })
        .collect()
}

pub const CLOSED_FORM_HEADER: &str = "I,alpha1,alpha2,payoff,limit_price,final_stock";

pub fn closed_form_csv(rows: &[ClosedFormRow]) -> String {
    let mut out = String::from(CLOSED_FORM_HEADER);
    out.push('\n');
    for r in rows {
        push_row(
            &mut out,
            &[
                r.players.to_string(),
                f17(r.alpha1),
                f17(r.alpha2),
                f17(r.payoff),
                f17(r.limit_price),
                f17(r.final_stock),
            ],
        );
    }
    out
}
