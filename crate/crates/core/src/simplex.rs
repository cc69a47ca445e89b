//! Row payoffs of the durable-good market and their maximization over the
//! capped simplex `{x ≥ 0, Σx ≤ cap}`.
//!
//! One seller's payoff from a row of per-round shares `a` is
//!
//! ```text
//! u(a) = scale · Σ_n a_n (D_n − κ S_n) F_n P_n,   S_n = Σ_{y≤n} a_y,
//!                                                 P_n = Π_{y<n} (1 − a_y − c_y)
//! ```
//!
//! where `D_n` is the demand intercept left by everybody else's cumulative
//! supply, `κ` the price slope, `F_n` the growth factor and `c_y` any
//! depletion caused by others in round `y`. The monopoly is `D ≡ 1`, `κ = 1`,
//! `c ≡ 0`.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct RowPayoff {
    pub demand: Vec<f64>,
    pub slope: f64,
    pub factors: Vec<f64>,
    pub drain: Vec<f64>,
    pub scale: f64,
}

impl RowPayoff {
    pub fn monopoly(factors: &[f64], y0: f64) -> Self {
        let n = factors.len();
        Self {
            demand: vec![1.0; n],
            slope: 1.0,
            factors: factors.to_vec(),
            drain: vec![0.0; n],
            scale: y0,
        }
    }

    pub fn rounds(&self) -> usize {
        self.factors.len()
    }

    pub fn value(&self, a: &[f64]) -> f64 {
        let mut cum = 0.0;
        let mut survive = 1.0;
        let mut total = 0.0;
        for n in 0..self.rounds() {
            cum += a[n];
            total += a[n] * (self.demand[n] - self.slope * cum) * self.factors[n] * survive;
            survive *= 1.0 - a[n] - self.drain[n];
        }
        self.scale * total
    }

    pub fn gradient(&self, a: &[f64]) -> Vec<f64> {
        let n_rounds = self.rounds();
        let mut cum = vec![0.0; n_rounds];
        let mut survive = vec![1.0; n_rounds];
        let mut acc = 0.0;
        let mut s = 1.0;
        for n in 0..n_rounds {
            acc += a[n];
            cum[n] = acc;
            survive[n] = s;
            s *= 1.0 - a[n] - self.drain[n];
        }
        let margin: Vec<f64> = (0..n_rounds).map(|n| self.demand[n] - self.slope * cum[n]).collect();
        (0..n_rounds)
            .map(|m| {
                let mut g = (margin[m] - self.slope * a[m]) * self.factors[m] * survive[m];
                // survival of rounds after m with factor m left out
                let mut skip = survive[m];
                for n in m + 1..n_rounds {
                    if n > m + 1 {
                        skip *= 1.0 - a[n - 1] - self.drain[n - 1];
                    }
                    g += a[n] * self.factors[n] * (-self.slope * survive[n] - margin[n] * skip);
                }
                self.scale * g
            })
            .collect()
    }
}

/// Euclidean projection onto `{x ≥ 0, Σx ≤ cap}`.
pub fn project_capped(y: &[f64], cap: f64) -> Vec<f64> {
    let clipped: Vec<f64> = y.iter().map(|v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= cap {
        return clipped;
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut shift = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - cap) / (k + 1) as f64;
        if v - t > 0.0 {
            shift = t;
        }
    }
    y.iter().map(|v| (v - shift).max(0.0)).collect()
}

/// Stationarity residual `‖x − P(x + g)‖∞`.
pub fn kkt_residual(x: &[f64], g: &[f64], cap: f64) -> f64 {
    let moved: Vec<f64> = x.iter().zip(g).map(|(x, g)| x + g).collect();
    project_capped(&moved, cap)
        .iter()
        .zip(x)
        .map(|(p, x)| (p - x).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizeOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iter: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowMaximum {
    pub x: Vec<f64>,
    pub value: f64,
    pub residual: f64,
}

/// Projected-gradient ascent with Armijo backtracking from each start, then
/// a Newton polish on the free coordinates. Returns the best local maximum;
/// ties keep the earliest start.
pub fn maximize_row(payoff: &RowPayoff, cap: f64, starts: &[Vec<f64>], opts: MaximizeOptions) -> RowMaximum {
    let mut best: Option<RowMaximum> = None;
    for start in starts {
        let local = ascend(payoff, cap, &project_capped(start, cap), opts);
        let better = match &best {
            None => true,
            Some(b) => local.value > b.value,
        };
        if better {
            best = Some(local);
        }
    }
    best.unwrap_or_else(|| {
        let x = vec![0.0; payoff.rounds()];
        let g = payoff.gradient(&x);
        RowMaximum {
            value: payoff.value(&x),
            residual: kkt_residual(&x, &g, cap),
            x,
        }
    })
}

fn ascend(payoff: &RowPayoff, cap: f64, start: &[f64], opts: MaximizeOptions) -> RowMaximum {
    let mut x = start.to_vec();
    let mut fx = payoff.value(&x);
    let mut g = payoff.gradient(&x);
    let mut step = 1.0;
    let mut residual = kkt_residual(&x, &g, cap);
    // residual at the last polish attempt
    let mut polished_at = 1e-6;
    for _ in 0..opts.max_iter {
        if residual < opts.tol {
            break;
        }
        if residual < 0.1 * polished_at {
            polished_at = residual;
            (x, fx, residual) = newton_polish(payoff, cap, x, residual, opts);
            g = payoff.gradient(&x);
            if residual < opts.tol {
                break;
            }
        }
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x + step * g).collect();
            let y = project_capped(&trial, cap);
            let gain: f64 = g.iter().zip(y.iter().zip(&x)).map(|(g, (y, x))| g * (y - x)).sum();
            let fy = payoff.value(&y);
            if gain > 0.0 && fy >= fx + 1e-4 * gain {
                x = y;
                fx = fy;
                moved = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        g = payoff.gradient(&x);
        residual = kkt_residual(&x, &g, cap);
        if !moved {
            break;
        }
    }
    if residual >= opts.tol {
        (x, fx, residual) = newton_polish(payoff, cap, x, residual, opts);
    }
    RowMaximum { x, value: fx, residual }
}

/// Newton iterations on the coordinates that stay positive under one
/// projected gradient step, the others pinned to zero, while the sum
/// constraint is slack. Steps are kept only when they lower the residual.
fn newton_polish(
    payoff: &RowPayoff,
    cap: f64,
    mut x: Vec<f64>,
    mut residual: f64,
    opts: MaximizeOptions,
) -> (Vec<f64>, f64, f64) {
    const H: f64 = 1e-6;
    for _ in 0..50 {
        if residual < opts.tol {
            break;
        }
        let g = payoff.gradient(&x);
        let ahead: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x + g).collect();
        let ahead = project_capped(&ahead, cap);
        let free: Vec<usize> = (0..x.len()).filter(|&i| ahead[i] > 0.0).collect();
        if free.is_empty() || x.iter().sum::<f64>() > cap - 1e-12 {
            break;
        }
        let k = free.len();
        let mut hess = DMatrix::<f64>::zeros(k, k);
        for (c, &i) in free.iter().enumerate() {
            let mut up = x.clone();
            let mut dn = x.clone();
            up[i] += H;
            dn[i] -= H;
            let gu = payoff.gradient(&up);
            let gd = payoff.gradient(&dn);
            for (r, &m) in free.iter().enumerate() {
                hess[(r, c)] = -(gu[m] - gd[m]) / (2.0 * H);
            }
        }
        let hess = 0.5 * (&hess + hess.transpose());
        let Some(chol) = hess.cholesky() else { break };
        let rhs = DVector::from_iterator(k, free.iter().map(|&i| g[i]));
        let delta = chol.solve(&rhs);
        let mut trial = vec![0.0; x.len()];
        for (r, &i) in free.iter().enumerate() {
            trial[i] = x[i] + delta[r];
        }
        let trial = project_capped(&trial, cap);
        let r_new = kkt_residual(&trial, &payoff.gradient(&trial), cap);
        if r_new >= residual {
            break;
        }
        x = trial;
        residual = r_new;
    }
    let v = payoff.value(&x);
    (x, v, residual)
}
