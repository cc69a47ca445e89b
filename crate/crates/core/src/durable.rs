//! Monopoly supply of a durable good harvested over `N` rounds.
//!
//! Output sold in earlier rounds stays on the market, so the price in round
//! `n` is `1 − Σ_{i≤n} α_i`. With growth factor `F_n` the revenue is
//!
//! ```text
//! G(α) = y₀ Σ_n α_n (1 − Σ_{i≤n} α_i) F_n Π_{i<n} (1 − α_i)
//! ```
//!
//! on `K = {α ≥ 0, Σα ≤ 1}`. Its maximum is either an interior stationary
//! point or has a block of leading zeros followed by positive shares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{f17, push_row};
use crate::model::ModelParams;
use crate::simplex::{kkt_residual, maximize_row, MaximizeOptions, RowPayoff};

const K_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundShares {
    pub shares: Vec<f64>,
    pub growth_factors: Vec<f64>,
    pub y0: f64,
}

impl RoundShares {
    pub fn new(shares: Vec<f64>, growth_factors: Vec<f64>, y0: f64) -> Result<Self> {
        let s = Self {
            shares,
            growth_factors,
            y0,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        check_factors(&self.growth_factors, self.y0)?;
        if self.shares.len() != self.growth_factors.len() {
            return Err(Error::param(format!(
                "{} shares for {} rounds",
                self.shares.len(),
                self.growth_factors.len()
            )));
        }
        if self.shares.iter().any(|a| !(*a >= 0.0)) || self.shares.iter().sum::<f64>() > 1.0 + K_SLACK {
            return Err(Error::domain("shares must be non-negative with sum at most 1"));
        }
        Ok(())
    }
}

fn check_factors(factors: &[f64], y0: f64) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::param("at least one round is required"));
    }
    if factors.iter().any(|f| !(*f > 0.0) || !f.is_finite()) {
        return Err(Error::param("growth factors must be positive and finite"));
    }
    if !(y0 >= 0.0) || !y0.is_finite() {
        return Err(Error::param(format!("initial stock must be >= 0, got {y0}")));
    }
    Ok(())
}

/// Factors `e^{(n−1)θ(r−ρ)}` seen at a fixed location.
pub fn growth_factors(rounds: usize, params: &ModelParams) -> Result<Vec<f64>> {
    params.validate()?;
    let st = params.net_growth() * params.round_time;
    Ok((0..rounds).map(|n| (n as f64 * st).exp()).collect())
}

pub fn durable_objective(s: &RoundShares) -> Result<f64> {
    s.validate()?;
    Ok(RowPayoff::monopoly(&s.growth_factors, s.y0).value(&s.shares))
}

pub fn durable_gradient(s: &RoundShares) -> Result<Vec<f64>> {
    s.validate()?;
    Ok(RowPayoff::monopoly(&s.growth_factors, s.y0).gradient(&s.shares))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "case")]
pub enum CaseTag {
    /// Every share strictly positive.
    Interior,
    /// The first `zeros` shares vanish, the rest are strictly positive.
    BoundaryPrefixZeros { zeros: usize },
}

impl CaseTag {
    /// `I` for interior solutions, `II` for zero prefixes.
    pub fn label(&self) -> &'static str {
        match self {
            CaseTag::Interior => "I",
            CaseTag::BoundaryPrefixZeros { .. } => "II",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonopolySolution {
    pub shares: RoundShares,
    pub objective: f64,
    pub case_tag: CaseTag,
    pub gradient_residual: f64,
}

impl MonopolySolution {
    pub fn csv_header(rounds: usize) -> String {
        let mut cols = vec!["N".to_string(), "case".to_string()];
        cols.extend((1..=rounds).map(|n| format!("alpha_{n}")));
        cols.push("objective".into());
        cols.push("residual".into());
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut fields = vec![self.shares.shares.len().to_string(), self.case_tag.label().to_string()];
        fields.extend(self.shares.shares.iter().map(|&a| f17(a)));
        fields.push(f17(self.objective));
        fields.push(f17(self.gradient_residual));
        let mut out = String::new();
        push_row(&mut out, &fields);
        out
    }
}

/// Every structured candidate: for each prefix length `n < N`, the best
/// stationary point with `α_1..α_n = 0` and the remaining shares strictly
/// positive. Candidates whose reduced maximum lies on the boundary, or
/// whose gradient residual is not below `tol`, are dropped.
pub fn monopoly_candidates(growth_factors: &[f64], y0: f64, tol: f64) -> Result<Vec<MonopolySolution>> {
    check_factors(growth_factors, y0)?;
    if !(tol > 0.0) {
        return Err(Error::param(format!("tol must be > 0, got {tol}")));
    }
    let n_rounds = growth_factors.len();
    let mut out = Vec::new();
    for zeros in 0..n_rounds {
        let tail = &growth_factors[zeros..];
        let payoff = RowPayoff::monopoly(tail, y0.max(f64::MIN_POSITIVE));
        let m = tail.len();
        let starts = [
            vec![1.0 / (m as f64 + 1.0); m],
            (0..m).map(|k| 0.5 / (k as f64 + 2.0)).collect::<Vec<_>>(),
            (0..m)
                .map(|k| 0.5 * (k as f64 + 1.0) / (m as f64 * (m as f64 + 1.0)))
                .collect::<Vec<_>>(),
        ];
        let best = maximize_row(&payoff, 1.0, &starts, MaximizeOptions::default());
        if best.x.iter().any(|&a| a <= K_SLACK) || best.x.iter().sum::<f64>() >= 1.0 - K_SLACK {
            continue;
        }
        let g = payoff.gradient(&best.x);
        let residual = g.iter().fold(0.0f64, |r, v| r.max(v.abs()));
        if !(residual < tol) {
            continue;
        }
        let mut shares = vec![0.0; zeros];
        shares.extend_from_slice(&best.x);
        let full = RowPayoff::monopoly(growth_factors, y0);
        out.push(MonopolySolution {
            objective: full.value(&shares),
            shares: RoundShares {
                shares,
                growth_factors: growth_factors.to_vec(),
                y0,
            },
            case_tag: if zeros == 0 {
                CaseTag::Interior
            } else {
                CaseTag::BoundaryPrefixZeros { zeros }
            },
            gradient_residual: residual,
        });
    }
    Ok(out)
}

/// Best of [`monopoly_candidates`]; objectives within 1e−12 prefer the
/// shorter zero prefix.
///
/// The candidates cover the global maximum when the factors are
/// non-decreasing. For other factor sequences the optimum may have zeros
/// after positive shares, and the result is only the best structured point.
pub fn solve_monopoly(growth_factors: &[f64], y0: f64, tol: f64) -> Result<MonopolySolution> {
    let candidates = monopoly_candidates(growth_factors, y0, tol)?;
    let mut best: Option<MonopolySolution> = None;
    for c in candidates {
        match &best {
            Some(b) if c.objective <= b.objective + 1e-12 => {}
            _ => best = Some(c),
        }
    }
    best.ok_or(Error::NonConvergence {
        solver: "durable monopoly",
        iterations: growth_factors.len(),
        residual: f64::NAN,
    })
}

/// Residual of the first-order conditions over `K` at any admissible point,
/// projected so that boundary optima score zero.
pub fn kkt_gap(s: &RoundShares) -> Result<f64> {
    let g = durable_gradient(s)?;
    Ok(kkt_residual(&s.shares, &g, 1.0))
}

/// Interior stationary point for two rounds.
pub fn closed_form_two_round(f1: f64, f2: f64) -> Result<(f64, f64)> {
    check_factors(&[f1, f2], 1.0)?;
    let radicand = f1 * (4.0 * f1 - 3.0 * f2);
    if radicand < 0.0 {
        return Err(Error::domain(format!(
            "no interior solution: f1(4f1 − 3f2) = {radicand} < 0"
        )));
    }
    let root = radicand.sqrt();
    let a1 = (-4.0 * f1 + 3.0 * f2 + 2.0 * root) / (3.0 * f2);
    let a2 = (2.0 * f1 - root) / (3.0 * f2);
    Ok((a1, a2))
}

/// Per-round share when growth is negligible.
pub fn slow_growth_share(rounds: usize) -> Result<f64> {
    if rounds == 0 {
        return Err(Error::param("at least one round is required"));
    }
    Ok(1.0 / (rounds as f64 + 1.0))
}
