//! Model parameters, round geometry on the circle, and the growth/harvest
//! primitives shared by every solver.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when snapping `T/θ` to an integer round count.
const ROUND_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Exponential growth rate `r`.
    pub growth_rate: f64,
    /// Discount rate `ρ ≥ 0`.
    pub discount_rate: f64,
    /// Horizon `T > 0`.
    pub horizon: f64,
    /// Time `θ > 0` needed for one round of the circle; speed is `2π/θ`.
    pub round_time: f64,
    /// Uniform stock level `y₀ ≥ 0`.
    pub initial_stock: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            growth_rate: 0.15,
            discount_rate: 0.0,
            horizon: 10.0,
            round_time: 5.0,
            initial_stock: 1.0,
        }
    }
}

impl ModelParams {
    pub fn new(
        growth_rate: f64,
        discount_rate: f64,
        horizon: f64,
        round_time: f64,
        initial_stock: f64,
    ) -> Result<Self> {
        let p = Self {
            growth_rate,
            discount_rate,
            horizon,
            round_time,
            initial_stock,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.growth_rate,
            self.discount_rate,
            self.horizon,
            self.round_time,
            self.initial_stock,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::param("model parameters must be finite"));
        }
        if self.round_time <= 0.0 {
            return Err(Error::param(format!("round time must be > 0, got {}", self.round_time)));
        }
        if self.horizon <= 0.0 {
            return Err(Error::param(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.discount_rate < 0.0 {
            return Err(Error::param("discount rate must be >= 0"));
        }
        if self.initial_stock < 0.0 {
            return Err(Error::param("initial stock must be >= 0"));
        }
        Ok(())
    }

    /// Net growth `σ = r − ρ`.
    pub fn net_growth(&self) -> f64 {
        self.growth_rate - self.discount_rate
    }

    pub fn speed(&self) -> f64 {
        TAU / self.round_time
    }

    pub fn with_round_time(mut self, round_time: f64) -> Self {
        self.round_time = round_time;
        self
    }
}

/// `k` complete rounds in `[0, T]` plus the residual `T − kθ`, and the
/// uniform within-round time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundGrid {
    pub complete_rounds: usize,
    pub residual: f64,
    pub steps_per_round: usize,
    pub step: f64,
    pub round_time: f64,
    pub horizon: f64,
}

impl RoundGrid {
    /// Rounds carried by trajectories: the `k` complete ones plus the
    /// (possibly empty) final round `k`.
    pub fn rounds(&self) -> usize {
        self.complete_rounds + 1
    }

    /// Samples per round. Nodes cover the closed round `[0, θ]`.
    pub fn nodes(&self) -> usize {
        self.steps_per_round + 1
    }

    pub fn node_time(&self, j: usize) -> f64 {
        j as f64 * self.step
    }

    /// Absolute time of node `j` in round `l`.
    pub fn absolute_time(&self, l: usize, j: usize) -> f64 {
        l as f64 * self.round_time + self.node_time(j)
    }

    /// Whether sample `(l, j)` lies inside the harvesting period. Only the
    /// final round has an inactive tail `t ≥ T − kθ`.
    pub fn is_active(&self, l: usize, j: usize) -> bool {
        l < self.complete_rounds || (l == self.complete_rounds && self.node_time(j) < self.residual)
    }

    /// Extended-horizon convention: the stock is notionally zero on
    /// `(T, (k+1)θ]`.
    pub fn stock_vanishes(&self, t: f64) -> bool {
        t > self.horizon
    }

    /// Trapezoid weights on the round nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.nodes();
        let mut w = vec![self.step; n];
        w[0] *= 0.5;
        w[n - 1] *= 0.5;
        w
    }
}

/// Splits the horizon into complete rounds and a residual.
pub fn round_schedule(params: &ModelParams, steps_per_round: usize) -> Result<RoundGrid> {
    params.validate()?;
    if steps_per_round == 0 {
        return Err(Error::param("steps_per_round must be >= 1"));
    }
    let theta = params.round_time;
    let horizon = params.horizon;
    let ratio = horizon / theta;
    let nearest = ratio.round();
    let k = if (ratio - nearest).abs() <= ROUND_SNAP * ratio.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    let residual = (horizon - k * theta).max(0.0);
    Ok(RoundGrid {
        complete_rounds: k as usize,
        residual: if residual >= theta { 0.0 } else { residual },
        steps_per_round,
        step: theta / steps_per_round as f64,
        round_time: theta,
        horizon,
    })
}

/// Location `mod(vt, 2π)` of the harvester at time `t`.
pub fn location_at(t: f64, params: &ModelParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param(format!("time must be >= 0, got {t}")));
    }
    params.validate()?;
    let rounds = t / params.round_time;
    let x = TAU * (rounds - rounds.floor());
    Ok(if x >= TAU { 0.0 } else { x })
}

/// Time of the `n`-th arrival (`n ≥ 1`) at location `x`.
pub fn arrival_time(n: usize, x: f64, params: &ModelParams) -> f64 {
    debug_assert!(n >= 1);
    (n - 1) as f64 * params.round_time + params.round_time * x / TAU
}

/// Exponential growth over `duration`.
pub fn grow(stock: f64, duration: f64, rate: f64) -> Result<f64> {
    if !(duration >= 0.0) {
        return Err(Error::param(format!("duration must be >= 0, got {duration}")));
    }
    if !(stock >= 0.0) {
        return Err(Error::param(format!("stock must be >= 0, got {stock}")));
    }
    Ok(stock * (rate * duration).exp())
}

/// Stock just before and just after a harvest impulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StockState {
    pub before: f64,
    pub after: f64,
}

impl StockState {
    pub fn harvested(&self) -> f64 {
        self.before - self.after
    }
}

pub fn harvest_jump(before: f64, share: f64) -> Result<StockState> {
    if !(0.0..=1.0).contains(&share) {
        return Err(Error::domain(format!("harvest share must lie in [0, 1], got {share}")));
    }
    if !(before >= 0.0) {
        return Err(Error::param(format!("stock must be >= 0, got {before}")));
    }
    Ok(StockState {
        before,
        after: (1.0 - share) * before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn params(horizon: f64, theta: f64) -> ModelParams {
        ModelParams::new(0.15, 0.0, horizon, theta, 1.0).unwrap()
    }

    #[test]
    fn schedule_examples() {
        let g = round_schedule(&params(10.0, 5.0), 8).unwrap();
        assert_eq!((g.complete_rounds, g.residual), (2, 0.0));
        let g = round_schedule(&params(10.0, 10.0), 8).unwrap();
        assert_eq!((g.complete_rounds, g.residual), (1, 0.0));
        let g = round_schedule(&params(10.0, 3.0), 8).unwrap();
        assert_eq!(g.complete_rounds, 3);
        assert_relative_eq!(g.residual, 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.step, 3.0 / 8.0);
    }

    #[test]
    fn schedule_snaps_zigzag_locus() {
        for m in 1..=40 {
            let theta = 10.0 / m as f64;
            let g = round_schedule(&params(10.0, theta), 4).unwrap();
            assert_eq!(g.complete_rounds, m);
            assert_eq!(g.residual, 0.0);
        }
    }

    #[test]
    fn schedule_rejects_bad_input() {
        let mut p = params(10.0, 5.0);
        assert!(round_schedule(&p, 0).is_err());
        p.round_time = 0.0;
        assert!(matches!(round_schedule(&p, 4), Err(Error::Parameter(_))));
        p.round_time = 1.0;
        p.horizon = -1.0;
        assert!(round_schedule(&p, 4).is_err());
    }

    #[test]
    fn activity_flags() {
        let g = round_schedule(&params(10.0, 3.0), 6).unwrap();
        assert!(g.is_active(2, 6));
        assert!(g.is_active(3, 1)); // t = 0.5 < 1
        assert!(!g.is_active(3, 2)); // t = 1.0 is the cut
        assert!(g.stock_vanishes(10.5));
        assert!(!g.stock_vanishes(10.0));
        let w = g.trapezoid_weights();
        assert_relative_eq!(w.iter().sum::<f64>(), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn location_examples() {
        let p = params(10.0, 4.0);
        assert_eq!(location_at(0.0, &p).unwrap(), 0.0);
        assert_eq!(location_at(4.0, &p).unwrap(), 0.0);
        assert_relative_eq!(location_at(1.0, &p).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert!(location_at(-1.0, &p).is_err());
        assert_relative_eq!(arrival_time(2, FRAC_PI_2, &p), 5.0);
    }

    #[test]
    fn grow_and_harvest_examples() {
        assert_relative_eq!(grow(1.0, 5.0, 0.15).unwrap(), 0.75f64.exp());
        assert_relative_eq!(grow(1.0, 5.0, 0.15).unwrap(), 2.1170, epsilon = 1e-4);
        assert_eq!(grow(3.3, 0.0, 0.4).unwrap(), 3.3);
        assert_eq!(grow(0.0, 7.0, 0.4).unwrap(), 0.0);
        assert!(grow(1.0, -1.0, 0.1).is_err());

        assert_eq!(harvest_jump(2.0, 0.5).unwrap().after, 1.0);
        assert_eq!(harvest_jump(2.0, 0.0).unwrap().after, 2.0);
        let full = harvest_jump(2.0, 1.0).unwrap();
        assert_eq!((full.after, full.harvested()), (0.0, 2.0));
        assert!(matches!(harvest_jump(2.0, 1.5), Err(Error::Domain(_))));
        assert!(harvest_jump(2.0, -0.1).is_err());
    }

    #[test]
    fn net_growth_tracks_rates() {
        let mut p = params(10.0, 5.0);
        p.discount_rate = 0.05;
        assert_relative_eq!(p.net_growth(), 0.10);
        p.growth_rate = 0.3;
        assert_relative_eq!(p.net_growth(), 0.25);
    }

    proptest! {
        #[test]
        fn composition_law(f in 0.0f64..50.0, share in 0.0f64..=1.0, theta in 0.01f64..20.0, r in -0.5f64..0.5) {
            let after = harvest_jump(f, share).unwrap().after;
            let lhs = grow(after, theta, r).unwrap();
            let rhs = (r * theta).exp() * (1.0 - share) * f;
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs.abs().max(1e-300));
            prop_assert!(after <= f);
        }

        #[test]
        fn schedule_is_consistent(horizon in 0.1f64..100.0, theta in 0.05f64..30.0) {
            let g = round_schedule(&params(horizon, theta), 3).unwrap();
            let k = g.complete_rounds as f64;
            prop_assert!(g.residual >= 0.0 && g.residual < theta);
            prop_assert!((k * theta + g.residual - horizon).abs() <= 1e-12 * horizon.max(1.0));
        }

        #[test]
        fn location_is_periodic(t in 0.0f64..50.0, theta in 0.1f64..10.0) {
            let p = params(10.0, theta);
            let a = location_at(t, &p).unwrap();
            let b = location_at(t + theta, &p).unwrap();
            let d = (a - b).abs();
            prop_assert!(d < 1e-9 || (TAU - d) < 1e-9);
        }
    }
}
