//! Aggregate discounted revenue of a non-durable harvest under a constant
//! share, in closed form and by brute-force spatial simulation.
//!
//! Revenue of the `n`-th visit to a location is `α(1 − nα)` times the
//! discounted stock in front of the harvester. Integrating over the circle
//! gives the per-round revenue
//!
//! ```text
//! E(n) = α(1 − nα)(1 − α)^(n−1) · 2πy₀ (e^(σθ) − 1)/(σθ) · e^((n−1)σθ)
//! ```
//!
//! and summing the `N = ⌊T/θ⌋` complete rounds gives a closed geometric form.
//! The incomplete last round covers only the arc reached before `T`.
//!
//! The published closed form weights the partial round with `α^N`. The
//! stock in front of the harvester on its `(N+1)`-th visit has survived `N`
//! harvests, so the spatial simulation books `(1 − α)^N` there; the
//! [`FinalRoundBase::Survivor`] variant (the default) is the one that agrees
//! with [`aggregate_revenue_oracle`]. The literal variant is kept for
//! comparison.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{f17, push_row};
use crate::model::{self, round_schedule, ModelParams};
use crate::par::{self, Exec};
use crate::scalar;

/// Below this `|α + e^(−σθ) − 1|` the closed form cancels badly and the
/// revenue is summed round by round instead.
const SINGULAR_BAND: f64 = 5e-2;
const SMALL_RATE: f64 = 1e-8;
const ORACLE_BLOCK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSharePlan {
    pub share: f64,
    pub round_time: f64,
}

impl ConstantSharePlan {
    pub fn new(share: f64, round_time: f64) -> Result<Self> {
        let plan = Self { share, round_time };
        plan.validate()?;
        Ok(plan)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.share) {
            return Err(Error::domain(format!("share must lie in [0, 1], got {}", self.share)));
        }
        if !(self.round_time > 0.0) || !self.round_time.is_finite() {
            return Err(Error::param(format!("round time must be > 0, got {}", self.round_time)));
        }
        Ok(())
    }
}

/// Base of the partial-round survival factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FinalRoundBase {
    /// `(1 − α)^N`, the stock that survived `N` harvests.
    #[default]
    Survivor,
    /// `α^N` as printed in the published formula.
    Literal,
}

/// `(e^x − 1)/x`, continuous through `x = 0`.
fn exprel(x: f64) -> f64 {
    if x.abs() < SMALL_RATE {
        1.0 + 0.5 * x
    } else {
        x.exp_m1() / x
    }
}

fn checked(plan: &ConstantSharePlan, params: &ModelParams) -> Result<ModelParams> {
    plan.validate()?;
    let p = params.with_round_time(plan.round_time);
    p.validate()?;
    Ok(p)
}

fn round_revenue(n: usize, alpha: f64, sigma_theta: f64, y0: f64) -> f64 {
    let n_f = n as f64;
    alpha
        * (1.0 - n_f * alpha)
        * (1.0 - alpha).powi(n as i32 - 1)
        * TAU
        * y0
        * exprel(sigma_theta)
        * ((n_f - 1.0) * sigma_theta).exp()
}

/// Discounted revenue `E(n)` of the `n`-th complete round.
pub fn per_round_revenue(n: usize, plan: &ConstantSharePlan, params: &ModelParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("round index starts at 1"));
    }
    let p = checked(plan, params)?;
    Ok(round_revenue(
        n,
        plan.share,
        p.net_growth() * p.round_time,
        p.initial_stock,
    ))
}

fn partial_round_revenue(alpha: f64, rounds: usize, residual: f64, p: &ModelParams, base: FinalRoundBase) -> f64 {
    if residual == 0.0 {
        return 0.0;
    }
    let sigma = p.net_growth();
    let theta = p.round_time;
    let survival = match base {
        FinalRoundBase::Survivor => 1.0 - alpha,
        FinalRoundBase::Literal => alpha,
    };
    // 2πy₀ (e^{σ·res} − 1)/(σθ), written through exprel for σ → 0
    alpha
        * (1.0 - (rounds as f64 + 1.0) * alpha)
        * survival.powi(rounds as i32)
        * TAU
        * p.initial_stock
        * (residual / theta)
        * exprel(sigma * residual)
        * (rounds as f64 * sigma * theta).exp()
}

fn complete_rounds_closed(alpha: f64, rounds: usize, p: &ModelParams) -> f64 {
    let st = p.net_growth() * p.round_time;
    let n = rounds as f64;
    let e = |k: f64| (k * st).exp();
    let d = alpha + (-st).exp() - 1.0;
    let inner = (alpha - 1.0) * (2.0 * e(-1.0) - e(-2.0) - 1.0)
        + ((alpha - 1.0 + n * alpha) * e(n + 1.0)
            + (n * alpha * alpha - 2.0 * alpha + 2.0 - 2.0 * n * alpha) * e(n + 2.0)
            + (alpha - 1.0 - n * alpha * alpha + n * alpha) * e(n + 3.0))
            * e(-3.0)
            * (1.0 - alpha).powi(rounds as i32);
    alpha * TAU * p.initial_stock / st * inner / (-(d * d))
}

fn uses_summation(alpha: f64, p: &ModelParams) -> bool {
    let st = p.net_growth() * p.round_time;
    st.abs() < SMALL_RATE || (alpha + (-st).exp() - 1.0).abs() < SINGULAR_BAND
}

/// Total revenue `G(θ, α)` from the closed form with the default
/// (oracle-consistent) partial-round term.
pub fn aggregate_revenue_closed(plan: &ConstantSharePlan, params: &ModelParams) -> Result<f64> {
    aggregate_revenue_closed_with(plan, params, FinalRoundBase::default())
}

pub fn aggregate_revenue_closed_with(
    plan: &ConstantSharePlan,
    params: &ModelParams,
    base: FinalRoundBase,
) -> Result<f64> {
    let p = checked(plan, params)?;
    let grid = round_schedule(&p, 1)?;
    let alpha = plan.share;
    let rounds = grid.complete_rounds;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let complete = if rounds == 0 {
        0.0
    } else if uses_summation(alpha, &p) {
        summed_complete_rounds(alpha, rounds, &p)
    } else {
        complete_rounds_closed(alpha, rounds, &p)
    };
    Ok(complete + partial_round_revenue(alpha, rounds, grid.residual, &p, base))
}

fn summed_complete_rounds(alpha: f64, rounds: usize, p: &ModelParams) -> f64 {
    let st = p.net_growth() * p.round_time;
    (1..=rounds).map(|n| round_revenue(n, alpha, st, p.initial_stock)).sum()
}

/// `Σ E(n)` over the complete rounds plus the partial round, term by term.
pub fn aggregate_revenue_summed(plan: &ConstantSharePlan, params: &ModelParams) -> Result<f64> {
    let p = checked(plan, params)?;
    let grid = round_schedule(&p, 1)?;
    let rounds = grid.complete_rounds;
    Ok(summed_complete_rounds(plan.share, rounds, &p)
        + partial_round_revenue(plan.share, rounds, grid.residual, &p, FinalRoundBase::Survivor))
}

/// Brute-force revenue: the circle is split into `locations` cells and, at
/// each cell midpoint, the stock is grown and harvested visit by visit up to
/// `T`. Uniform initial stock `y₀`.
pub fn aggregate_revenue_oracle(plan: &ConstantSharePlan, params: &ModelParams, locations: usize) -> Result<f64> {
    let y0 = params.initial_stock;
    aggregate_revenue_oracle_with(plan, params, locations, |_| y0, Exec::default())
}

/// Oracle with an arbitrary initial stock profile `f₀(x)`, `x ∈ [0, 2π)`.
pub fn aggregate_revenue_oracle_with<F>(
    plan: &ConstantSharePlan,
    params: &ModelParams,
    locations: usize,
    initial: F,
    exec: Exec,
) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let p = checked(plan, params)?;
    if locations == 0 {
        return Err(Error::param("locations must be >= 1"));
    }
    let dx = TAU / locations as f64;
    let blocks = locations.div_ceil(ORACLE_BLOCK);
    let partial = par::map_indexed(exec, blocks, |b| -> Result<f64> {
        let lo = b * ORACLE_BLOCK;
        let hi = (lo + ORACLE_BLOCK).min(locations);
        let mut acc = 0.0;
        for j in lo..hi {
            let x = (j as f64 + 0.5) * dx;
            acc += location_revenue(plan.share, x, initial(x), &p)?;
        }
        Ok(acc)
    });
    let mut total = 0.0;
    for s in partial {
        total += s?;
    }
    Ok(total * dx)
}

fn location_revenue(alpha: f64, x: f64, f0: f64, p: &ModelParams) -> Result<f64> {
    let mut stock = f0;
    let mut clock = 0.0;
    let mut revenue = 0.0;
    for n in 1.. {
        let t = model::arrival_time(n, x, p);
        if t > p.horizon {
            break;
        }
        let before = model::grow(stock, t - clock, p.growth_rate)?;
        revenue += alpha * (1.0 - n as f64 * alpha) * before * (-p.discount_rate * t).exp();
        stock = model::harvest_jump(before, alpha)?.after;
        clock = t;
    }
    Ok(revenue)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShareOptimum {
    pub round_time: f64,
    pub share: f64,
    pub revenue: f64,
}

/// Global maximizer of `G(θ, ·)` on `[0, 1]`: a 1e-3 scan, then golden
/// section to a bracket below 1e-8.
pub fn optimize_constant_share(round_time: f64, params: &ModelParams) -> Result<ShareOptimum> {
    // validates θ and the remaining parameters once
    let probe = ConstantSharePlan::new(0.0, round_time)?;
    checked(&probe, params)?;
    let g = |a: f64| {
        aggregate_revenue_closed(&ConstantSharePlan { share: a, round_time }, params).unwrap_or(f64::NEG_INFINITY)
    };
    let best = scalar::grid_golden_max(g, 0.0, 1.0, 1e-3, 1e-8);
    Ok(ShareOptimum {
        round_time,
        share: best.x,
        revenue: best.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Variant {
    ClosedForm,
    Oracle { locations: usize },
}

impl Variant {
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::ClosedForm => "closed-form",
            Variant::Oracle { .. } => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueRow {
    pub theta: f64,
    pub alpha: f64,
    pub revenue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevenueTable {
    pub rows: Vec<RevenueRow>,
    pub params: ModelParams,
    pub variant: Variant,
}

impl RevenueTable {
    pub const HEADER: &'static str = "theta,alpha,G,variant";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(Self::HEADER);
        out.push('\n');
        for row in &self.rows {
            push_row(
                &mut out,
                &[
                    f17(row.theta),
                    f17(row.alpha),
                    f17(row.revenue),
                    self.variant.tag().to_string(),
                ],
            );
        }
        out
    }

    /// Rows with the given `θ`, in `α` order of the sweep.
    pub fn theta_cut(&self, theta: f64) -> impl Iterator<Item = &RevenueRow> {
        self.rows.iter().filter(move |r| r.theta == theta)
    }

    pub fn alpha_cut(&self, alpha: f64) -> impl Iterator<Item = &RevenueRow> {
        self.rows.iter().filter(move |r| r.alpha == alpha)
    }
}

fn dedup(values: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(values.len());
    for &v in values {
        if !out.iter().any(|u| u.to_bits() == v.to_bits()) {
            out.push(v);
        }
    }
    out
}

/// `G` on the product grid, closed form.
pub fn sweep_objective(thetas: &[f64], alphas: &[f64], params: &ModelParams) -> Result<RevenueTable> {
    sweep_objective_with(thetas, alphas, params, Variant::ClosedForm, Exec::default())
}

pub fn sweep_objective_with(
    thetas: &[f64],
    alphas: &[f64],
    params: &ModelParams,
    variant: Variant,
    exec: Exec,
) -> Result<RevenueTable> {
    if thetas.is_empty() || alphas.is_empty() {
        return Err(Error::param("sweep grids must be non-empty"));
    }
    let thetas = dedup(thetas);
    let alphas = dedup(alphas);
    for &t in &thetas {
        ConstantSharePlan::new(0.0, t)?;
    }
    for &a in &alphas {
        ConstantSharePlan::new(a, 1.0)?;
    }
    params.validate()?;
    if let Variant::Oracle { locations: 0 } = variant {
        return Err(Error::param("oracle sweep needs locations >= 1"));
    }

    let cells = thetas.len() * alphas.len();
    let values = par::map_indexed(exec, cells, |c| {
        let plan = ConstantSharePlan {
            round_time: thetas[c / alphas.len()],
            share: alphas[c % alphas.len()],
        };
        match variant {
            Variant::ClosedForm => aggregate_revenue_closed(&plan, params),
            // cells already run in parallel
            Variant::Oracle { locations } => {
                let y0 = params.initial_stock;
                aggregate_revenue_oracle_with(&plan, params, locations, |_| y0, Exec::Sequential)
            }
        }
    });
    let mut rows = Vec::with_capacity(cells);
    for (c, g) in values.into_iter().enumerate() {
        let revenue = g?;
        if !revenue.is_finite() {
            return Err(Error::domain(format!("non-finite revenue in sweep cell {c}")));
        }
        rows.push(RevenueRow {
            theta: thetas[c / alphas.len()],
            alpha: alphas[c % alphas.len()],
            revenue,
        });
    }
    Ok(RevenueTable {
        rows,
        params: *params,
        variant,
    })
}
