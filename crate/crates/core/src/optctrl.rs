//! Round-decomposed optimal control of the share `α(t)` with a
//! forward-backward adjoint sweep.
//!
//! Within round `l` the harvester meets, at time `t ∈ [0, θ]`, the stock
//! `f_l(t−)`. Harvesting links consecutive rounds through
//! `f_{l+1}(t−) = e^{rθ}(1 − α_l(t)) f_l(t−)`, so every within-round time is
//! an independent chain of rounds. The revenue is
//!
//! ```text
//! J(α) = Σ_l ∫₀^θ e^{−ρ(t+θl)} α_l(t)(1 − α_l(t)) f_l(t−) dt
//! ```
//!
//! over the active part of the horizon. The adjoint `p_l` is propagated
//! backward and the control is recovered as `½(1 − e^{ρ(t+θl)+rθ} p_{l+1})`,
//! clamped to `[0, 1]`; the last (possibly partial) round always takes ½.
//!
//! All integrals use trapezoid weights on the round nodes, masked on the
//! inactive tail of the final round, so the discrete adjoint is the exact
//! gradient of the discrete objective.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::{f17, push_row};
use crate::model::{ModelParams, RoundGrid};

type Samples = Vec<Vec<f64>>;

fn same_grid(grid: &RoundGrid, params: &ModelParams) -> Result<()> {
    params.validate()?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    if !close(grid.round_time, params.round_time) || !close(grid.horizon, params.horizon) {
        return Err(Error::param("round grid was built for different parameters"));
    }
    Ok(())
}

fn check_shape(grid: &RoundGrid, values: &Samples) -> Result<()> {
    if values.len() != grid.rounds() || values.iter().any(|r| r.len() != grid.nodes()) {
        return Err(Error::param(format!(
            "expected {} rounds of {} samples",
            grid.rounds(),
            grid.nodes()
        )));
    }
    Ok(())
}

fn sample(grid: &RoundGrid, f: impl Fn(usize, f64) -> f64) -> Samples {
    (0..grid.rounds())
        .map(|l| (0..grid.nodes()).map(|j| f(l, grid.node_time(j))).collect())
        .collect()
}

/// Admissible control: one sample per round node, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPath {
    grid: RoundGrid,
    values: Samples,
}

impl ControlPath {
    pub fn new(grid: RoundGrid, values: Samples) -> Result<Self> {
        check_shape(&grid, &values)?;
        if let Some(bad) = values.iter().flatten().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::domain(format!("control sample {bad} outside [0, 1]")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: RoundGrid, share: f64) -> Result<Self> {
        Self::from_fn(grid, |_, _| share)
    }

    /// Samples `f(l, t)` with `t` the time within round `l`.
    pub fn from_fn(grid: RoundGrid, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let values = sample(&grid, f);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &RoundGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn at(&self, l: usize, j: usize) -> f64 {
        self.values[l][j]
    }

    /// `α + ε w`, if it stays admissible.
    pub fn perturbed(&self, w: &Perturbation, eps: f64) -> Result<Self> {
        check_shape(&self.grid, &w.values)?;
        let values = self
            .values
            .iter()
            .zip(&w.values)
            .map(|(a, d)| a.iter().zip(d).map(|(a, d)| a + eps * d).collect())
            .collect();
        Self::new(self.grid, values)
    }

    /// Sup-norm distance to another control on the same grid.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Direction `w` of a Gateaux derivative. Unlike a control it may take any
/// real value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub grid: RoundGrid,
    pub values: Samples,
}

impl Perturbation {
    pub fn from_fn(grid: RoundGrid, f: impl Fn(usize, f64) -> f64) -> Self {
        let values = sample(&grid, f);
        Self { grid, values }
    }

    pub fn zero(grid: RoundGrid) -> Self {
        Self::from_fn(grid, |_, _| 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTrajectory {
    pub grid: RoundGrid,
    /// `f_l(t−)`, zero on the inactive tail of the final round.
    pub before_harvest: Samples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointTrajectory {
    pub grid: RoundGrid,
    pub p: Samples,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityTrajectory {
    pub grid: RoundGrid,
    pub z: Samples,
}

fn mask(grid: &RoundGrid, l: usize, j: usize) -> f64 {
    if grid.is_active(l, j) {
        1.0
    } else {
        0.0
    }
}

fn discount(params: &ModelParams, grid: &RoundGrid, l: usize, j: usize) -> f64 {
    (-params.discount_rate * grid.absolute_time(l, j)).exp()
}

/// Stock in front of the harvester, round by round, from uniform `y₀`.
pub fn forward_density(control: &ControlPath, params: &ModelParams) -> Result<DensityTrajectory> {
    let grid = control.grid;
    same_grid(&grid, params)?;
    let carry = (params.growth_rate * grid.round_time).exp();
    let mut f = vec![vec![0.0; grid.nodes()]; grid.rounds()];
    for j in 0..grid.nodes() {
        let mut stock = params.initial_stock * (params.growth_rate * grid.node_time(j)).exp();
        for l in 0..grid.rounds() {
            f[l][j] = stock * mask(&grid, l, j);
            stock *= carry * (1.0 - control.at(l, j));
        }
    }
    Ok(DensityTrajectory {
        grid,
        before_harvest: f,
    })
}

/// Linearized response `z = ∂f/∂α · w` (no impulses: the jump is folded
/// into the recursion).
pub fn sensitivity(control: &ControlPath, w: &Perturbation, params: &ModelParams) -> Result<SensitivityTrajectory> {
    let grid = control.grid;
    check_shape(&grid, &w.values)?;
    let f = forward_density(control, params)?;
    let carry = (params.growth_rate * grid.round_time).exp();
    let mut z = vec![vec![0.0; grid.nodes()]; grid.rounds()];
    for j in 0..grid.nodes() {
        for l in 0..grid.rounds() - 1 {
            let next = carry * (-w.values[l][j] * f.before_harvest[l][j] + (1.0 - control.at(l, j)) * z[l][j]);
            z[l + 1][j] = next * mask(&grid, l + 1, j);
        }
    }
    Ok(SensitivityTrajectory { grid, z })
}

/// Backward recursion for the adjoint, starting from the running revenue on
/// the final round.
pub fn backward_adjoint(control: &ControlPath, params: &ModelParams) -> Result<AdjointTrajectory> {
    let grid = control.grid;
    same_grid(&grid, params)?;
    let carry = (params.growth_rate * grid.round_time).exp();
    let last = grid.rounds() - 1;
    let mut p = vec![vec![0.0; grid.nodes()]; grid.rounds()];
    for j in 0..grid.nodes() {
        let a = control.at(last, j);
        p[last][j] = mask(&grid, last, j) * discount(params, &grid, last, j) * a * (1.0 - a);
        for l in (0..last).rev() {
            let a = control.at(l, j);
            p[l][j] = carry * (1.0 - a) * p[l + 1][j] + discount(params, &grid, l, j) * a * (1.0 - a);
        }
    }
    Ok(AdjointTrajectory { grid, p })
}

/// Pointwise maximizer of the Hamiltonian given the adjoint.
pub fn control_update(adjoint: &AdjointTrajectory, params: &ModelParams) -> Result<ControlPath> {
    let grid = adjoint.grid;
    same_grid(&grid, params)?;
    let last = grid.rounds() - 1;
    let lift = params.growth_rate * grid.round_time;
    let values = (0..grid.rounds())
        .map(|l| {
            (0..grid.nodes())
                .map(|j| {
                    if l == last {
                        return 0.5;
                    }
                    let shadow = (params.discount_rate * grid.absolute_time(l, j) + lift).exp() * adjoint.p[l + 1][j];
                    (0.5 * (1.0 - shadow)).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    ControlPath::new(grid, values)
}

/// Trapezoid-weighted sum over the active samples of `g(l, j)`.
fn integrate(grid: &RoundGrid, g: impl Fn(usize, usize) -> f64) -> f64 {
    let w = grid.trapezoid_weights();
    let mut total = 0.0;
    for l in 0..grid.rounds() {
        for (j, wj) in w.iter().enumerate() {
            if grid.is_active(l, j) {
                total += wj * g(l, j);
            }
        }
    }
    total
}

/// Discounted revenue `J(α)`.
pub fn objective(control: &ControlPath, params: &ModelParams) -> Result<f64> {
    let f = forward_density(control, params)?;
    let grid = control.grid;
    Ok(integrate(&grid, |l, j| {
        let a = control.at(l, j);
        discount(params, &grid, l, j) * a * (1.0 - a) * f.before_harvest[l][j]
    }))
}

/// Directional derivative of `J` at `α` along `w`. At an optimum it is
/// `≤ 0` for every admissible direction.
pub fn gateaux_check(control: &ControlPath, w: &Perturbation, params: &ModelParams) -> Result<f64> {
    let f = forward_density(control, params)?;
    let z = sensitivity(control, w, params)?;
    let grid = control.grid;
    Ok(integrate(&grid, |l, j| {
        let a = control.at(l, j);
        discount(params, &grid, l, j)
            * (w.values[l][j] * (1.0 - 2.0 * a) * f.before_harvest[l][j] + a * (1.0 - a) * z.z[l][j])
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSettings {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub steps_per_round: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
            steps_per_round: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSolution {
    pub control: ControlPath,
    pub density: DensityTrajectory,
    pub adjoint: AdjointTrajectory,
    pub objective: f64,
    pub diagnostics: SweepDiagnostics,
}

impl ControlSolution {
    pub const HEADER: &'static str = "round,t,alpha,p,f_before";

    /// One row per round node; `t` is absolute time.
    pub fn to_csv(&self) -> String {
        let grid = self.control.grid;
        let mut out = String::new();
        out.push_str(Self::HEADER);
        out.push('\n');
        for l in 0..grid.rounds() {
            for j in 0..grid.nodes() {
                push_row(
                    &mut out,
                    &[
                        l.to_string(),
                        f17(grid.absolute_time(l, j)),
                        f17(self.control.at(l, j)),
                        f17(self.adjoint.p[l][j]),
                        f17(self.density.before_harvest[l][j]),
                    ],
                );
            }
        }
        out
    }
}

/// Damped forward-backward sweep from `α ≡ ½` until the sup-norm change of
/// the control drops below `tol`.
pub fn solve_optimal_control(
    params: &ModelParams,
    grid: &RoundGrid,
    settings: &SweepSettings,
) -> Result<ControlSolution> {
    same_grid(grid, params)?;
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(Error::param(format!(
            "damping must lie in (0, 1], got {}",
            settings.damping
        )));
    }
    if !(settings.tol > 0.0) {
        return Err(Error::param(format!("tol must be > 0, got {}", settings.tol)));
    }
    if settings.max_iter == 0 {
        return Err(Error::param("max_iter must be >= 1"));
    }
    let d = settings.damping;
    let mut control = ControlPath::constant(*grid, 0.5)?;
    let mut residual = f64::INFINITY;
    for iteration in 1..=settings.max_iter {
        // the density is not needed to update the control
        let adjoint = backward_adjoint(&control, params)?;
        let target = control_update(&adjoint, params)?;
        let values: Samples = control
            .values
            .iter()
            .zip(&target.values)
            .map(|(a, t)| {
                a.iter()
                    .zip(t)
                    .map(|(a, t)| (a + d * (t - a)).clamp(0.0, 1.0))
                    .collect()
            })
            .collect();
        let next = ControlPath::new(*grid, values)?;
        residual = next.sup_distance(&control);
        control = next;
        if residual < settings.tol {
            let density = forward_density(&control, params)?;
            let adjoint = backward_adjoint(&control, params)?;
            let objective = objective(&control, params)?;
            return Ok(ControlSolution {
                control,
                density,
                adjoint,
                objective,
                diagnostics: SweepDiagnostics {
                    iterations: iteration,
                    residual,
                },
            });
        }
    }
    Err(Error::NonConvergence {
        solver: "forward-backward sweep",
        iterations: settings.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::round_schedule;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn setup(r: f64, rho: f64, horizon: f64, theta: f64, steps: usize) -> (ModelParams, RoundGrid) {
        let p = ModelParams::new(r, rho, horizon, theta, 1.0).unwrap();
        let g = round_schedule(&p, steps).unwrap();
        (p, g)
    }

    #[test]
    fn density_examples() {
        let (p, g) = setup(0.15, 0.0, 10.0, 3.0, 16);
        let zero = forward_density(&ControlPath::constant(g, 0.0).unwrap(), &p).unwrap();
        for l in 0..g.complete_rounds {
            for j in 0..g.nodes() {
                assert_relative_eq!(
                    zero.before_harvest[l][j],
                    (0.15 * g.absolute_time(l, j)).exp(),
                    max_relative = 1e-14
                );
            }
        }
        let a = 0.3;
        let c = forward_density(&ControlPath::constant(g, a).unwrap(), &p).unwrap();
        for l in 0..g.complete_rounds {
            for j in 0..g.nodes() {
                let hand = (0.15 * g.absolute_time(l, j)).exp() * (1.0 - a).powi(l as i32);
                assert_relative_eq!(c.before_harvest[l][j], hand, max_relative = 1e-13);
            }
        }
        let wipe = ControlPath::from_fn(g, |l, _| if l == 0 { 1.0 } else { 0.4 }).unwrap();
        let f = forward_density(&wipe, &p).unwrap();
        assert!(f.before_harvest[1..].iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn inactive_tail_is_zero() {
        let (p, g) = setup(0.15, 0.0, 10.0, 3.0, 30);
        // residual 1 of θ = 3: nodes with t >= 1 in round 3 are inactive
        let f = forward_density(&ControlPath::constant(g, 0.2).unwrap(), &p).unwrap();
        for j in 0..g.nodes() {
            let t = g.node_time(j);
            assert_eq!(f.before_harvest[3][j] > 0.0, t < 1.0 - 1e-12, "t = {t}");
        }
        let adj = backward_adjoint(&ControlPath::constant(g, 0.2).unwrap(), &p).unwrap();
        assert!(adj.p[3][10..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sensitivity_examples() {
        let (p, g) = setup(0.1, 0.02, 9.0, 3.0, 8);
        let alpha = ControlPath::constant(g, 0.3).unwrap();
        let z = sensitivity(&alpha, &Perturbation::zero(g), &p).unwrap();
        assert!(z.z.iter().flatten().all(|&v| v == 0.0));

        let zero = ControlPath::constant(g, 0.0).unwrap();
        let one = Perturbation::from_fn(g, |_, _| 1.0);
        let z = sensitivity(&zero, &one, &p).unwrap();
        let f = forward_density(&zero, &p).unwrap();
        assert!(z.z[0].iter().all(|&v| v == 0.0));
        for j in 0..g.nodes() {
            assert_relative_eq!(
                z.z[1][j],
                -(0.3f64).exp() * f.before_harvest[0][j],
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn adjoint_examples() {
        let (p, g) = setup(0.1, 0.05, 2.0, 1.0, 10);
        let zero = backward_adjoint(&ControlPath::constant(g, 0.0).unwrap(), &p).unwrap();
        assert!(zero.p.iter().flatten().all(|&v| v == 0.0));
        let full = backward_adjoint(&ControlPath::constant(g, 1.0).unwrap(), &p).unwrap();
        assert!(full.p.iter().flatten().all(|&v| v == 0.0));

        // two full rounds, α ≡ ½
        let half = backward_adjoint(&ControlPath::constant(g, 0.5).unwrap(), &p).unwrap();
        for j in 0..g.nodes() {
            let t = g.node_time(j);
            let p1 = (-0.05 * (t + 1.0)).exp() / 4.0;
            let p0 = (0.1f64).exp() * 0.5 * p1 + (-0.05 * t).exp() / 4.0;
            assert_relative_eq!(half.p[1][j], p1, max_relative = 1e-15);
            assert_relative_eq!(half.p[0][j], p0, max_relative = 1e-15);
        }
    }

    #[test]
    fn update_rules() {
        let (p, g) = setup(0.1, 0.05, 5.0, 2.0, 10);
        let flat = AdjointTrajectory {
            grid: g,
            p: vec![vec![0.0; g.nodes()]; g.rounds()],
        };
        let u = control_update(&flat, &p).unwrap();
        assert!(u.values().iter().flatten().all(|&a| a == 0.5));

        let heavy = AdjointTrajectory {
            grid: g,
            p: vec![vec![3.0; g.nodes()]; g.rounds()],
        };
        let u = control_update(&heavy, &p).unwrap();
        for l in 0..g.rounds() - 1 {
            assert!(u.values()[l].iter().all(|&a| a == 0.0));
        }
        assert!(u.values()[g.rounds() - 1].iter().all(|&a| a == 0.5));
    }

    #[test]
    fn single_partial_round_is_half() {
        let (p, g) = setup(0.15, 0.0, 3.0, 5.0, 64);
        assert_eq!(g.complete_rounds, 0);
        let s = solve_optimal_control(&p, &g, &SweepSettings::default()).unwrap();
        assert_eq!(s.diagnostics.iterations, 1);
        assert!(s.control.values().iter().flatten().all(|&a| a == 0.5));
    }

    #[test]
    fn solver_is_stationary_and_beats_constant_shares() {
        let (p, g) = setup(0.15, 0.03, 10.0, 3.0, 64);
        let s = solve_optimal_control(&p, &g, &SweepSettings::default()).unwrap();
        let last = g.rounds() - 1;
        for j in 0..g.nodes() {
            if g.is_active(last, j) {
                assert!((s.control.at(last, j) - 0.5).abs() <= 1e-12);
            }
        }
        for a in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let j = objective(&ControlPath::constant(g, a).unwrap(), &p).unwrap();
            assert!(s.objective >= j, "{a}: {} < {j}", s.objective);
        }
        // early rounds harvest less than the myopic ½
        assert!(s.control.at(0, 0) < 0.5);
    }

    #[test]
    fn bad_settings_are_rejected() {
        let (p, g) = setup(0.15, 0.0, 10.0, 3.0, 8);
        let frozen = SweepSettings {
            damping: 0.0,
            ..SweepSettings::default()
        };
        assert!(solve_optimal_control(&p, &g, &frozen).is_err());
        let short = SweepSettings {
            max_iter: 2,
            ..SweepSettings::default()
        };
        assert!(matches!(
            solve_optimal_control(&p, &g, &short),
            Err(Error::NonConvergence { .. })
        ));
        let other = ModelParams::new(0.15, 0.0, 12.0, 3.0, 1.0).unwrap();
        assert!(solve_optimal_control(&other, &g, &SweepSettings::default()).is_err());
    }

    #[test]
    fn zero_direction_and_pushing_up_from_zero() {
        let (p, g) = setup(0.15, 0.0, 10.0, 3.0, 16);
        let zero = ControlPath::constant(g, 0.0).unwrap();
        assert_eq!(gateaux_check(&zero, &Perturbation::zero(g), &p).unwrap(), 0.0);
        let up = Perturbation::from_fn(g, |_, _| 1.0);
        assert!(gateaux_check(&zero, &up, &p).unwrap() > 0.0);
    }

    #[test]
    fn csv_layout() {
        let (p, g) = setup(0.15, 0.0, 4.0, 2.0, 4);
        let s = solve_optimal_control(&p, &g, &SweepSettings::default()).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("round,t,alpha,p,f_before\n"));
        assert_eq!(csv.lines().count(), 1 + g.rounds() * g.nodes());
    }

    fn smooth_control(g: RoundGrid, a: f64, b: f64, c: f64) -> ControlPath {
        ControlPath::from_fn(g, |l, t| {
            (0.5 + 0.3 * (a * t + b * l as f64 + c).sin()).clamp(0.05, 0.95)
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn duality_identity(a in 0.0f64..3.0, b in 0.0f64..3.0, c in 0.0f64..6.0, d in 0.0f64..6.0) {
            let (p, g) = setup(0.12, 0.04, 10.0, 3.0, 32);
            let alpha = smooth_control(g, a, b, c);
            let w = Perturbation::from_fn(g, |l, t| (d * t - l as f64).cos());
            let f = forward_density(&alpha, &p).unwrap();
            let z = sensitivity(&alpha, &w, &p).unwrap();
            let adj = backward_adjoint(&alpha, &p).unwrap();
            let carry = (p.growth_rate * g.round_time).exp();
            let lhs = integrate(&g, |l, j| {
                let x = alpha.at(l, j);
                discount(&p, &g, l, j) * x * (1.0 - x) * z.z[l][j]
            });
            let rhs = -integrate(&g, |l, j| {
                if l + 1 < g.rounds() {
                    carry * w.values[l][j] * f.before_harvest[l][j] * adj.p[l + 1][j]
                } else {
                    0.0
                }
            });
            prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(rhs.abs()).max(1e-300), "{lhs} vs {rhs}");
        }

        #[test]
        fn sensitivity_matches_finite_differences(a in 0.0f64..3.0, c in 0.0f64..6.0, d in 0.0f64..6.0) {
            let (p, g) = setup(0.12, 0.04, 10.0, 3.0, 16);
            let alpha = smooth_control(g, a, 1.0, c);
            let w = Perturbation::from_fn(g, |_, t| (d * t).sin());
            let z = sensitivity(&alpha, &w, &p).unwrap();
            let base = forward_density(&alpha, &p).unwrap();
            let mut errs = Vec::new();
            for eps in [1e-4, 1e-5, 1e-6] {
                let moved = forward_density(&alpha.perturbed(&w, eps).unwrap(), &p).unwrap();
                let err = base.before_harvest.iter().flatten()
                    .zip(moved.before_harvest.iter().flatten())
                    .zip(z.z.iter().flatten())
                    .map(|((f0, f1), zz)| ((f1 - f0) / eps - zz).abs())
                    .fold(0.0, f64::max);
                errs.push(err);
                prop_assert!(err <= 10.0 * eps, "eps {eps}: {err}");
            }
            // first order: shrinking ε shrinks the error
            prop_assert!(errs[2] < errs[0]);
        }

        #[test]
        fn updates_stay_admissible(a in 0.0f64..3.0, c in 0.0f64..6.0, rho in 0.0f64..0.5) {
            let (p, g) = setup(0.3, rho, 10.0, 2.5, 16);
            let adj = backward_adjoint(&smooth_control(g, a, 0.5, c), &p).unwrap();
            let u = control_update(&adj, &p).unwrap();
            prop_assert!(u.values().iter().flatten().all(|a| (0.0..=1.0).contains(a)));
            prop_assert!(u.values()[g.rounds() - 1].iter().all(|&a| a == 0.5));
        }
    }
}
