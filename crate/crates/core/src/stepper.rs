//! Semi-implicit two-step time integration.
//!
//! One step advances
//!
//! ```text
//! (3u⁺ − 4u + u⁻) / (2Δt) = 2 D_xx u − D_xx u⁻ + f(u⁺)
//! ```
//!
//! with the diffusion extrapolated explicitly from the two stored levels
//! and the reaction taken implicitly. The implicit part decouples into one
//! `m × m` Newton solve per node, so the only matrices ever factored are
//! the pointwise reaction Jacobians.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid1D;
use crate::reaction::ReactionSystem;

/// Time step and Newton controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    /// Tolerance on the sup norm of the pointwise residual, relative to
    /// `max(1, (3/2Δt)·|u|∞)`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl StepConfig {
    pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;
    pub const DEFAULT_NEWTON_MAX_ITER: usize = 25;

    pub fn new(dt: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            newton_tol: Self::DEFAULT_NEWTON_TOL,
            newton_max_iter: Self::DEFAULT_NEWTON_MAX_ITER,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidStepConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if self.newton_tol.is_nan() || self.newton_tol <= 0.0 {
            return Err(Error::InvalidStepConfig(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidStepConfig("newton_max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Leading coefficient `3 / (2Δt)` of the two-step formula.
    pub fn lead(&self) -> f64 {
        1.5 / self.dt
    }
}

/// Dirichlet values at the two ends, one entry per component.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// The two stored time levels `u^n`, `u^{n−1}` and the time `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState {
    pub u_curr: Field,
    pub u_prev: Field,
    pub time: f64,
}

impl SchemeState {
    pub fn new(u_curr: Field, u_prev: Field, time: f64) -> Result<Self> {
        if !u_curr.same_shape(&u_prev) {
            return Err(Error::DimensionMismatch(
                "u^n and u^(n-1) must share grid and component count".into(),
            ));
        }
        Ok(Self { u_curr, u_prev, time })
    }
}

/// Result of one pointwise Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSolution {
    pub u: Vec<f64>,
    /// Number of linear solves performed.
    pub iterations: usize,
    pub residual: f64,
}

/// Second-order central difference at interior nodes, zero on the boundary.
pub fn apply_dxx(field: &Field, grid: &Grid1D) -> Field {
    let m = field.components();
    let n = field.n_nodes();
    debug_assert_eq!(n, grid.n_nodes());
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let u = field.values();
    let mut out = Field::zeros(n, m);
    let o = out.values_mut();
    for j in 1..n - 1 {
        for c in 0..m {
            let k = j * m + c;
            o[k] = (u[k - m] - 2.0 * u[k] + u[k + m]) * inv_h2;
        }
    }
    out
}

/// Solves `lead · u − f(u) = rhs` at one node by Newton's method, starting
/// from `guess`.
#[allow(clippy::too_many_arguments)]
pub fn solve_point(
    lead: f64,
    reaction: &dyn ReactionSystem,
    pos: &[f64],
    t: f64,
    rhs: &[f64],
    guess: &[f64],
    cfg: &StepConfig,
    node: usize,
) -> Result<PointSolution> {
    let m = rhs.len();
    let mut u = guess.to_vec();
    let mut f = vec![0.0; m];
    let mut r = vec![0.0; m];
    let mut jac = vec![0.0; m * m];
    let mut iterations = 0;
    loop {
        reaction.eval(pos, t, &u, &mut f);
        let mut res = 0.0_f64;
        let mut scale = 1.0_f64;
        for i in 0..m {
            r[i] = lead * u[i] - f[i] - rhs[i];
            res = res.max(r[i].abs());
            scale = scale.max((lead * u[i]).abs());
        }
        if res <= cfg.newton_tol * scale {
            return Ok(PointSolution {
                u,
                iterations,
                residual: res,
            });
        }
        if iterations == cfg.newton_max_iter || !res.is_finite() {
            return Err(Error::NewtonDivergence {
                node,
                residual: res,
                iterations,
            });
        }
        reaction.jacobian(pos, t, &u, &mut jac);
        if m == 1 {
            let d = lead - jac[0];
            u[0] -= r[0] / d;
        } else {
            let mut a = DMatrix::from_row_slice(m, m, &jac);
            a.neg_mut();
            for i in 0..m {
                a[(i, i)] += lead;
            }
            let delta = a.lu().solve(&DVector::from_column_slice(&r)).ok_or(
                Error::NewtonDivergence {
                    node,
                    residual: res,
                    iterations,
                },
            )?;
            for i in 0..m {
                u[i] -= delta[i];
            }
        }
        iterations += 1;
    }
}

/// Solves the implicit relation `3u/(2Δt) − f(u) = rhs` at one node.
pub fn newton_point_solve(
    reaction: &dyn ReactionSystem,
    pos: &[f64],
    t: f64,
    rhs: &[f64],
    guess: &[f64],
    cfg: &StepConfig,
) -> Result<PointSolution> {
    solve_point(cfg.lead(), reaction, pos, t, rhs, guess, cfg, 0)
}

/// Runs the pointwise implicit solve at every node for which `position`
/// returns `Some`; other nodes of `out` are left untouched. On failure the
/// lowest failing node index is reported, independent of scheduling.
#[allow(clippy::too_many_arguments)]
pub(crate) fn solve_nodes<P>(
    lead: f64,
    reaction: &dyn ReactionSystem,
    t: f64,
    rhs: &[f64],
    guess: &[f64],
    cfg: &StepConfig,
    position: P,
    out: &mut [f64],
) -> Result<()>
where
    P: Fn(usize) -> Option<([f64; 2], usize)> + Sync,
{
    let m = reaction.components();
    let failure = out
        .par_chunks_mut(m)
        .enumerate()
        .with_min_len(128)
        .filter_map(|(node, slot)| {
            let (pos, dim) = position(node)?;
            let range = node * m..(node + 1) * m;
            match solve_point(
                lead,
                reaction,
                &pos[..dim],
                t,
                &rhs[range.clone()],
                &guess[range],
                cfg,
                node,
            ) {
                Ok(sol) => {
                    slot.copy_from_slice(&sol.u);
                    None
                }
                Err(e) => Some((node, e)),
            }
        })
        .min_by_key(|(node, _)| *node);
    match failure {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}

fn check_components(field: &Field, reaction: &dyn ReactionSystem, bc: &BoundaryValues) -> Result<()> {
    let m = field.components();
    if reaction.components() != m || bc.left.len() != m || bc.right.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "field has {m} components, reaction {}, boundary data {}/{}",
            reaction.components(),
            bc.left.len(),
            bc.right.len()
        )));
    }
    Ok(())
}

fn impose_boundary(field: &mut Field, bc: &BoundaryValues) {
    let last = field.n_nodes() - 1;
    field.node_mut(0).copy_from_slice(&bc.left);
    field.node_mut(last).copy_from_slice(&bc.right);
}

/// Advances one step of the two-step scheme, returning `u^{n+1}` with the
/// boundary nodes set to `bc` (the data at `t_{n+1}`).
pub fn step(
    state: &SchemeState,
    grid: &Grid1D,
    reaction: &dyn ReactionSystem,
    cfg: &StepConfig,
    bc: &BoundaryValues,
) -> Result<Field> {
    check_components(&state.u_curr, reaction, bc)?;
    let dt = cfg.dt;
    let m = state.u_curr.components();
    let n_nodes = grid.n_nodes();
    let u = state.u_curr.values();
    let um = state.u_prev.values();

    let extrapolated: Vec<f64> = u.iter().zip(um).map(|(a, b)| 2.0 * a - b).collect();
    let lap = apply_dxx(&Field::from_values(m, extrapolated)?, grid);
    let inv_2dt = 0.5 / dt;
    let rhs: Vec<f64> = u
        .iter()
        .zip(um)
        .zip(lap.values())
        .map(|((a, b), l)| (4.0 * a - b) * inv_2dt + l)
        .collect();

    let mut next = state.u_curr.clone();
    let t_next = state.time + dt;
    solve_nodes(
        cfg.lead(),
        reaction,
        t_next,
        &rhs,
        u,
        cfg,
        |j| (j > 0 && j + 1 < n_nodes).then(|| ([grid.node(j), 0.0], 1)),
        next.values_mut(),
    )?;
    impose_boundary(&mut next, bc);
    Ok(next)
}

/// Produces `u^1` from `u^0` by one step that is explicit in diffusion and
/// implicit in reaction: `(u¹ − u⁰)/Δt = D_xx u⁰ + f(u¹)`.
pub fn startup_step(
    u0: &Field,
    t0: f64,
    grid: &Grid1D,
    reaction: &dyn ReactionSystem,
    cfg: &StepConfig,
    bc: &BoundaryValues,
) -> Result<Field> {
    check_components(u0, reaction, bc)?;
    let dt = cfg.dt;
    let n_nodes = grid.n_nodes();
    let lap = apply_dxx(u0, grid);
    let rhs: Vec<f64> = u0
        .values()
        .iter()
        .zip(lap.values())
        .map(|(a, l)| a / dt + l)
        .collect();
    let mut next = u0.clone();
    solve_nodes(
        1.0 / dt,
        reaction,
        t0 + dt,
        &rhs,
        u0.values(),
        cfg,
        |j| (j > 0 && j + 1 < n_nodes).then(|| ([grid.node(j), 0.0], 1)),
        next.values_mut(),
    )?;
    impose_boundary(&mut next, bc);
    Ok(next)
}
