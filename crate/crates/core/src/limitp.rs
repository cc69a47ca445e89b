//! Collusion in the replica market and why it dissolves with many sellers.
//!
//! The replica market scales demand with the number of players: the price is
//! `1 − (1/I) Σ_j (cumulative supply of j)`, so every player faces the
//! monopoly problem when all collude on `1/(N+1)`. A cartel member who
//! deviates in round 1 gains for one round before being punished forever
//! with the Cournot shares. Whether that pays depends on the discount
//! factor `δ = e^{−ρθ}`.
//!
//! Sellers only observe a noisy aggregate price
//! `p̃ = 1 − (1/I) Σ_i (α_i + ε_i)`. A single deviation moves its mean by
//! `O(1/I)` while the noise shrinks only like `O(1/√I)`, so deviations become
//! undetectable as `I` grows.
//!
//! Monte Carlo draws use ChaCha8 seeded from the configured seed, with one
//! stream per block of trials, so results do not depend on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{f17, push_row};
use crate::game::GameConfig;
use crate::model::ModelParams;
use crate::optctrl::ControlPath;
use crate::par::{self, Exec};
use crate::scalar;
use crate::simplex::{maximize_row, MaximizeOptions, RowPayoff};

const TRIAL_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicaConfig {
    pub players: usize,
    pub rounds: usize,
    #[serde(default)]
    pub discount_rate: f64,
    #[serde(default = "default_variance")]
    pub noise_variance: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Length of one round in the units of `ρ`.
    #[serde(default = "default_round_time")]
    pub round_time: f64,
}

fn default_variance() -> f64 {
    0.01
}
fn default_trials() -> usize {
    10_000
}
fn default_round_time() -> f64 {
    1.0
}

impl Default for ReplicaConfig {
    fn default() -> Self {
        Self {
            players: 2,
            rounds: 2,
            discount_rate: 0.0,
            noise_variance: default_variance(),
            trials: default_trials(),
            seed: 0,
            round_time: default_round_time(),
        }
    }
}

impl ReplicaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.players == 0 || self.rounds == 0 {
            return Err(Error::param("players and rounds must be >= 1"));
        }
        if !(self.discount_rate >= 0.0) || !self.discount_rate.is_finite() {
            return Err(Error::param(format!(
                "discount rate must be >= 0, got {}",
                self.discount_rate
            )));
        }
        // a zero variance is accepted as the noiseless control case
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::param(format!(
                "noise variance must be finite and >= 0, got {}",
                self.noise_variance
            )));
        }
        if self.trials == 0 {
            return Err(Error::param("trials must be >= 1"));
        }
        if !(self.round_time > 0.0) || !self.round_time.is_finite() {
            return Err(Error::param(format!("round time must be > 0, got {}", self.round_time)));
        }
        Ok(())
    }

    fn check_game(&self, game: &GameConfig) -> Result<()> {
        self.validate()?;
        game.validate()?;
        if game.rounds() != self.rounds {
            return Err(Error::param(format!(
                "{} growth factors for {} rounds",
                game.rounds(),
                self.rounds
            )));
        }
        Ok(())
    }
}

pub fn replica_collusive_share(rounds: usize) -> Result<f64> {
    if rounds == 0 {
        return Err(Error::param("rounds must be >= 1"));
    }
    Ok(1.0 / (rounds as f64 + 1.0))
}

pub fn replica_cournot_share(players: usize, rounds: usize) -> Result<f64> {
    if players == 0 || rounds == 0 {
        return Err(Error::param("players and rounds must be >= 1"));
    }
    let i = players as f64;
    Ok(i / (i * (rounds as f64 - 1.0) + 2.0))
}

/// Row payoff in the replica market when every opponent plays `share` in
/// every round.
fn replica_row(players: usize, share: f64, factors: &[f64], y0: f64) -> RowPayoff {
    let i = players as f64;
    let others = (i - 1.0) * share;
    RowPayoff {
        demand: (1..=factors.len()).map(|n| 1.0 - others * n as f64 / i).collect(),
        slope: 1.0 / i,
        factors: factors.to_vec(),
        drain: vec![0.0; factors.len()],
        scale: y0,
    }
}

/// Per-round payoff of a symmetric replica profile, averaged over rounds.
fn symmetric_per_round(players: usize, share: f64, game: &GameConfig) -> f64 {
    let n = game.rounds();
    replica_row(players, share, &game.growth_factors, game.y0).value(&vec![share; n]) / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationProfit {
    /// Round-1 payoff of the best one-round deviation.
    pub deviation: f64,
    /// The deviator's round-1 share.
    pub deviation_share: f64,
    pub collusive_per_round: f64,
    pub punishment_per_round: f64,
}

/// Gain from deviating in round 1 against colluding opponents, and the
/// per-round payoffs on the collusive and the punishment path.
pub fn deviation_profit(config: &ReplicaConfig, game: &GameConfig) -> Result<DeviationProfit> {
    config.check_game(game)?;
    let i = config.players;
    let s_m = replica_collusive_share(config.rounds)?;
    let collusive = symmetric_per_round(i, s_m, game);
    if i == 1 {
        return Ok(DeviationProfit {
            deviation: collusive,
            deviation_share: s_m,
            collusive_per_round: collusive,
            punishment_per_round: collusive,
        });
    }
    let slice = replica_row(i, s_m, &game.growth_factors[..1], game.y0);
    let best = maximize_row(&slice, 1.0, &[vec![s_m], vec![0.5]], MaximizeOptions::default());
    Ok(DeviationProfit {
        deviation: best.value,
        deviation_share: best.x[0],
        collusive_per_round: collusive,
        punishment_per_round: symmetric_per_round(i, replica_cournot_share(i, config.rounds)?, game),
    })
}

/// Round-1 deviation share in closed form: `min(1, (IN + 1)/(2(N + 1)))`.
pub fn deviation_share(players: usize, rounds: usize) -> Result<f64> {
    if players == 0 || rounds == 0 {
        return Err(Error::param("players and rounds must be >= 1"));
    }
    if players == 1 {
        return replica_collusive_share(rounds);
    }
    let (i, n) = (players as f64, rounds as f64);
    Ok(((i * n + 1.0) / (2.0 * (n + 1.0))).min(1.0))
}

/// Grim-trigger margin: value of colluding minus value of deviating once
/// and being punished ever after, per unit of round payoff.
pub fn sustainability_gap(profits: &DeviationProfit, rho: f64, round_time: f64) -> f64 {
    let now = profits.collusive_per_round - profits.deviation;
    let later = profits.collusive_per_round - profits.punishment_per_round;
    if later == 0.0 {
        return now;
    }
    // δ/(1 − δ) with δ = e^{−ρθ}
    now + later / (rho * round_time).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalDiscount {
    pub rho: f64,
    pub bracket: (f64, f64),
    pub gap_at_bracket: (f64, f64),
    pub residual: f64,
    pub profits: DeviationProfit,
}

/// Largest discount rate at which collusion survives, by bisection on the
/// sustainability gap inside `bracket`.
pub fn critical_discount(config: &ReplicaConfig, game: &GameConfig, bracket: (f64, f64)) -> Result<CriticalDiscount> {
    let profits = deviation_profit(config, game)?;
    if profits.deviation <= profits.collusive_per_round {
        return Err(Error::domain(
            "no gain from deviating: collusion holds at every discount rate",
        ));
    }
    let (lo, hi) = bracket;
    if !(lo >= 0.0 && hi > lo) || !hi.is_finite() {
        return Err(Error::param(format!("invalid bracket [{lo}, {hi}]")));
    }
    let gap = |rho: f64| sustainability_gap(&profits, rho, config.round_time);
    let rho = scalar::bisect(gap, lo, hi, 1e-10)?;
    Ok(CriticalDiscount {
        rho,
        bracket,
        gap_at_bracket: (gap(lo), gap(hi)),
        residual: gap(rho),
        profits,
    })
}

/// `p̃ = 1 − (1/I) Σ (α_i + ε_i)` with Gaussian `ε_i`.
pub fn noisy_price_sample<R: rand::Rng + ?Sized>(shares: &[f64], noise_variance: f64, rng: &mut R) -> Result<f64> {
    if shares.is_empty() {
        return Err(Error::param("at least one player is required"));
    }
    let noise = Normal::new(0.0, noise_variance.sqrt()).map_err(|e| Error::param(e.to_string()))?;
    let total: f64 = shares.iter().map(|a| a + noise.sample(rng)).sum();
    Ok(1.0 - total / shares.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub players: usize,
    /// Drop in the mean observed price caused by one deviator.
    pub shift: f64,
    /// Sample standard deviation of the observed price under collusion.
    pub noise_std: f64,
    /// Share of deviation trials flagged by the midpoint test.
    pub power: f64,
    /// Share of collusive trials flagged by the same test.
    pub false_alarm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub records: Vec<DetectionRecord>,
    pub trials: usize,
    pub shift_slope: f64,
    /// Absent when the noise vanishes.
    pub std_slope: Option<f64>,
}

impl DetectionReport {
    pub const HEADER: &'static str = "I,shift,noise_std,power";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.records {
            push_row(
                &mut out,
                &[r.players.to_string(), f17(r.shift), f17(r.noise_std), f17(r.power)],
            );
        }
        out
    }

    /// Monte Carlo standard error of a power estimate.
    pub fn power_std_error(&self, power: f64) -> f64 {
        (power * (1.0 - power) / self.trials as f64).sqrt()
    }
}

/// Ordinary least-squares slope of `ln y` on `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Default, Clone, Copy)]
struct Tally {
    sum: f64,
    sum_sq: f64,
    flagged_deviation: usize,
    flagged_collusion: usize,
}

/// Collusive price noise and detection power of the midpoint threshold test
/// for each player count.
pub fn detection_experiment(players: &[usize], config: &ReplicaConfig, game: &GameConfig) -> Result<DetectionReport> {
    detection_experiment_with(players, config, game, Exec::default())
}

pub fn detection_experiment_with(
    players: &[usize],
    config: &ReplicaConfig,
    game: &GameConfig,
    exec: Exec,
) -> Result<DetectionReport> {
    config.check_game(game)?;
    if players.len() < 2 {
        return Err(Error::param("detection needs at least two player counts"));
    }
    if players.iter().any(|&i| i < 2) {
        return Err(Error::param("detection needs at least two players"));
    }
    let s_m = replica_collusive_share(config.rounds)?;
    let noise = Normal::new(0.0, config.noise_variance.sqrt()).map_err(|e| Error::param(e.to_string()))?;
    let mut records = Vec::with_capacity(players.len());
    for &i in players {
        let a_d = deviation_share(i, config.rounds)?;
        let inv = 1.0 / i as f64;
        let shift = (a_d - s_m) * inv;
        let mean = 1.0 - s_m;
        let threshold = mean - 0.5 * shift;
        let blocks = config.trials.div_ceil(TRIAL_BLOCK);
        let tallies = par::map_indexed(exec, blocks, |b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(((i as u64) << 32) | b as u64);
            let lo = b * TRIAL_BLOCK;
            let hi = (lo + TRIAL_BLOCK).min(config.trials);
            let mut t = Tally::default();
            for _ in lo..hi {
                let colluding: f64 = (0..i).map(|_| noise.sample(&mut rng)).sum::<f64>() * inv;
                let deviating: f64 = (0..i).map(|_| noise.sample(&mut rng)).sum::<f64>() * inv;
                // prices relative to the collusive mean
                let p_c = -colluding;
                let p_d = -shift - deviating;
                t.sum += p_c;
                t.sum_sq += p_c * p_c;
                if mean + p_d < threshold {
                    t.flagged_deviation += 1;
                }
                if mean + p_c < threshold {
                    t.flagged_collusion += 1;
                }
            }
            t
        });
        let total = tallies.iter().fold(Tally::default(), |a, t| Tally {
            sum: a.sum + t.sum,
            sum_sq: a.sum_sq + t.sum_sq,
            flagged_deviation: a.flagged_deviation + t.flagged_deviation,
            flagged_collusion: a.flagged_collusion + t.flagged_collusion,
        });
        let n = config.trials as f64;
        let var = if config.trials > 1 {
            ((total.sum_sq - total.sum * total.sum / n) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        records.push(DetectionRecord {
            players: i,
            shift,
            noise_std: var.sqrt(),
            power: total.flagged_deviation as f64 / n,
            false_alarm: total.flagged_collusion as f64 / n,
        });
    }
    let xs: Vec<f64> = records.iter().map(|r| r.players as f64).collect();
    let shifts: Vec<f64> = records.iter().map(|r| r.shift).collect();
    let stds: Vec<f64> = records.iter().map(|r| r.noise_std).collect();
    let shift_slope = log_log_slope(&xs, &shifts).ok_or_else(|| Error::domain("mean shift vanished on the grid"))?;
    Ok(DetectionReport {
        records,
        trials: config.trials,
        shift_slope,
        std_slope: log_log_slope(&xs, &stds),
    })
}

/// Whether collusion can hold in the non-durable market. Harvest in the
/// last round cannot be punished, so with two or more players any plan that
/// still harvests there unravels.
pub fn nondurable_collusion_feasible(players: usize, plan: &ControlPath, params: &ModelParams) -> Result<bool> {
    if players == 0 {
        return Err(Error::param("at least one player is required"));
    }
    let density = crate::optctrl::forward_density(plan, params)?;
    let grid = plan.grid();
    let last = grid.rounds() - 1;
    let w = grid.trapezoid_weights();
    let final_harvest: f64 = (0..grid.nodes())
        .filter(|&j| grid.is_active(last, j))
        .map(|j| w[j] * plan.at(last, j) * density.before_harvest[last][j])
        .sum();
    Ok(players == 1 || final_harvest <= 0.0)
}
