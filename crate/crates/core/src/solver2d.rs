//! Dirichlet problems on `(0, π)²`: five-point Laplacian, the two-step
//! scheme, and the tensor-filter postprocess with first-order shifts.

use rayon::prelude::*;

use crate::dst::SineTransform;
use crate::error::{Error, Result};
use crate::field::{Field2D, DEFAULT_BLOWUP_THRESHOLD};
use crate::filter::{filter_trace_with, kappa_critical_2d, FilterSpec, SpectralFilter};
use crate::grid::Grid2D;
use crate::reaction::ReactionSystem;
use crate::shift::{shift2d, unshift2d, EdgeTraces};
use crate::stepper::{solve_nodes, StepConfig};

/// A 2D reaction-diffusion problem with Dirichlet data on all four edges.
pub trait Problem2D: ReactionSystem {
    fn name(&self) -> &str;

    fn initial(&self, x: f64, y: f64, out: &mut [f64]);

    /// Dirichlet value at the edge point `(x, y)`.
    fn boundary_value(&self, x: f64, y: f64, t: f64, out: &mut [f64]);

    fn exact(&self, _x: f64, _y: f64, _t: f64, _out: &mut [f64]) -> bool {
        false
    }
}

/// Samples the boundary data of `problem` on the edges of `grid` at `t`.
pub fn edge_traces(problem: &dyn Problem2D, grid: &Grid2D, t: f64) -> EdgeTraces {
    let (nx, ny) = (grid.x.n_intervals(), grid.y.n_intervals());
    let m = problem.components();
    let along_x = |y: f64| {
        let mut out = vec![0.0; (nx + 1) * m];
        for (i, chunk) in out.chunks_mut(m).enumerate() {
            problem.boundary_value(grid.x.node(i), y, t, chunk);
        }
        out
    };
    let along_y = |x: f64| {
        let mut out = vec![0.0; (ny + 1) * m];
        for (j, chunk) in out.chunks_mut(m).enumerate() {
            problem.boundary_value(x, grid.y.node(j), t, chunk);
        }
        out
    };
    EdgeTraces {
        nx,
        ny,
        m,
        bottom: along_x(0.0),
        top: along_x(grid.y.node(ny)),
        left: along_y(0.0),
        right: along_y(grid.x.node(nx)),
    }
}

/// Five-point Laplacian on interior nodes; edge nodes are 0.
pub fn apply_laplacian_5pt(field: &Field2D, grid: &Grid2D) -> Field2D {
    let (nx, ny) = field.shape();
    let m = field.components();
    let (ihx2, ihy2) = (grid.x.spacing().powi(-2), grid.y.spacing().powi(-2));
    let mut out = Field2D::zeros(grid, m);
    let row = (nx + 1) * m;
    let src = field.values();
    out.values_mut()
        .par_chunks_mut(row)
        .enumerate()
        .filter(|(j, _)| *j > 0 && *j < ny)
        .for_each(|(j, dst)| {
            for i in 1..nx {
                for c in 0..m {
                    let at = |ii: usize, jj: usize| src[(jj * (nx + 1) + ii) * m + c];
                    let u = at(i, j);
                    dst[i * m + c] = (at(i - 1, j) - 2.0 * u + at(i + 1, j)) * ihx2
                        + (at(i, j - 1) - 2.0 * u + at(i, j + 1)) * ihy2;
                }
            }
        });
    out
}

/// Two stored levels of a 2D run.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState2D {
    pub u_curr: Field2D,
    pub u_prev: Field2D,
    pub time: f64,
}

fn check_shapes(u: &Field2D, reaction: &dyn ReactionSystem, bc: &EdgeTraces) -> Result<()> {
    let (nx, ny) = u.shape();
    if reaction.components() != u.components() || bc.nx != nx || bc.ny != ny || bc.m != u.components() {
        return Err(Error::DimensionMismatch(
            "field, reaction and boundary traces disagree".into(),
        ));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn implicit_solve(
    lead: f64,
    guess: &Field2D,
    rhs: &[f64],
    grid: &Grid2D,
    reaction: &dyn ReactionSystem,
    t: f64,
    cfg: &StepConfig,
    bc: &EdgeTraces,
) -> Result<Field2D> {
    let (nx, ny) = guess.shape();
    let mut next = guess.clone();
    solve_nodes(
        lead,
        reaction,
        t,
        rhs,
        guess.values(),
        cfg,
        |node| {
            let (i, j) = (node % (nx + 1), node / (nx + 1));
            (i > 0 && j > 0 && i < nx && j < ny).then(|| ([grid.x.node(i), grid.y.node(j)], 2))
        },
        next.values_mut(),
    )?;
    bc.impose_on(&mut next);
    Ok(next)
}

/// One step of the two-step scheme with the five-point Laplacian; `bc`
/// holds the edge data at `t_{n+1}`.
pub fn step2d(
    state: &SchemeState2D,
    grid: &Grid2D,
    reaction: &dyn ReactionSystem,
    cfg: &StepConfig,
    bc: &EdgeTraces,
) -> Result<Field2D> {
    check_shapes(&state.u_curr, reaction, bc)?;
    let (u, um) = (state.u_curr.values(), state.u_prev.values());
    let mut extrapolated = state.u_curr.clone();
    for (e, (a, b)) in extrapolated.values_mut().iter_mut().zip(u.iter().zip(um)) {
        *e = 2.0 * a - b;
    }
    let lap = apply_laplacian_5pt(&extrapolated, grid);
    let inv_2dt = 0.5 / cfg.dt;
    let rhs: Vec<f64> = u
        .iter()
        .zip(um)
        .zip(lap.values())
        .map(|((a, b), l)| (4.0 * a - b) * inv_2dt + l)
        .collect();
    implicit_solve(cfg.lead(), &state.u_curr, &rhs, grid, reaction, state.time + cfg.dt, cfg, bc)
}

/// Startup step `(u¹ − u⁰)/Δt = Δ_h u⁰ + f(u¹)`.
pub fn startup_step2d(
    u0: &Field2D,
    t0: f64,
    grid: &Grid2D,
    reaction: &dyn ReactionSystem,
    cfg: &StepConfig,
    bc: &EdgeTraces,
) -> Result<Field2D> {
    check_shapes(u0, reaction, bc)?;
    let lap = apply_laplacian_5pt(u0, grid);
    let rhs: Vec<f64> = u0
        .values()
        .iter()
        .zip(lap.values())
        .map(|(a, l)| a / cfg.dt + l)
        .collect();
    implicit_solve(1.0 / cfg.dt, u0, &rhs, grid, reaction, t0 + cfg.dt, cfg, bc)
}

/// Separable sine filter on interior nodes: coefficient `(k, l)` is scaled
/// by `σ(κk/N_x) σ(κl/N_y)`.
#[derive(Debug, Clone)]
pub struct TensorFilter {
    tx: SineTransform,
    ty: SineTransform,
    wx: Vec<f64>,
    wy: Vec<f64>,
}

impl TensorFilter {
    pub fn new(nx: usize, ny: usize, spec_x: &FilterSpec, spec_y: &FilterSpec) -> Self {
        Self {
            tx: SineTransform::new(nx),
            ty: SineTransform::new(ny),
            wx: (1..nx).map(|k| spec_x.weight(k, nx)).collect(),
            wy: (1..ny).map(|l| spec_y.weight(l, ny)).collect(),
        }
    }

    /// Filters one component stored as `(N_x+1)(N_y+1)` values, row `j`
    /// contiguous. Edges are set to 0.
    pub fn apply_scalar(&self, values: &mut [f64]) {
        let (nx, ny) = (self.tx.n_intervals(), self.ty.n_intervals());
        let row = nx + 1;
        values.par_chunks_mut(row).enumerate().for_each(|(j, r)| {
            if j == 0 || j == ny {
                r.iter_mut().for_each(|v| *v = 0.0);
            } else {
                filter_line(&self.tx, &self.wx, r);
            }
        });
        let mut cols: Vec<f64> = vec![0.0; (nx + 1) * (ny + 1)];
        for j in 0..=ny {
            for i in 0..=nx {
                cols[i * (ny + 1) + j] = values[j * row + i];
            }
        }
        cols.par_chunks_mut(ny + 1).enumerate().for_each(|(i, col)| {
            if i == 0 || i == nx {
                col.iter_mut().for_each(|v| *v = 0.0);
            } else {
                filter_line(&self.ty, &self.wy, col);
            }
        });
        for j in 0..=ny {
            for i in 0..=nx {
                values[j * row + i] = cols[i * (ny + 1) + j];
            }
        }
    }
}

fn filter_line(t: &SineTransform, w: &[f64], line: &mut [f64]) {
    let n = t.n_intervals();
    let mut coeffs = vec![0.0; n - 1];
    t.forward(&line[1..n], &mut coeffs);
    coeffs.iter_mut().zip(w).for_each(|(c, w)| *c *= w);
    t.inverse(&coeffs, &mut line[1..n]);
    line[0] = 0.0;
    line[n] = 0.0;
}

/// Boundary-trace filters plus the tensor filter for one grid.
#[derive(Debug, Clone)]
pub struct Postprocessor2D {
    trace_x: SpectralFilter,
    trace_y: SpectralFilter,
    tensor: TensorFilter,
}

impl Postprocessor2D {
    pub fn new(grid: &Grid2D, spec: &FilterSpec) -> Self {
        let (nx, ny) = (grid.x.n_intervals(), grid.y.n_intervals());
        Self {
            trace_x: SpectralFilter::new(nx, *spec),
            trace_y: SpectralFilter::new(ny, *spec),
            tensor: TensorFilter::new(nx, ny, spec, spec),
        }
    }

    /// Filters each edge trace component by component, keeping corners.
    pub fn filter_traces(&self, bc: &EdgeTraces) -> EdgeTraces {
        let m = bc.m;
        let run = |filter: &SpectralFilter, data: &[f64]| {
            let mut out = data.to_vec();
            for c in 0..m {
                let comp: Vec<f64> = data.iter().skip(c).step_by(m).copied().collect();
                for (k, v) in filter_trace_with(filter, &comp).into_iter().enumerate() {
                    out[k * m + c] = v;
                }
            }
            out
        };
        EdgeTraces {
            bottom: run(&self.trace_x, &bc.bottom),
            top: run(&self.trace_x, &bc.top),
            left: run(&self.trace_y, &bc.left),
            right: run(&self.trace_y, &bc.right),
            ..bc.clone()
        }
    }

    /// Trace filtering, two-stage shift, tensor filter, unshift. The edges
    /// of the result equal the filtered traces exactly.
    pub fn apply(&self, u: &Field2D, bc: &EdgeTraces) -> Result<Field2D> {
        let filtered_bc = self.filter_traces(bc);
        let (mut w, coeffs) = shift2d(u, &filtered_bc)?;
        let m = w.components();
        let mut comp = vec![0.0; w.n_nodes()];
        for c in 0..m {
            for (k, v) in comp.iter_mut().enumerate() {
                *v = w.values()[k * m + c];
            }
            self.tensor.apply_scalar(&mut comp);
            for (k, v) in comp.iter().enumerate() {
                w.values_mut()[k * m + c] = *v;
            }
        }
        Ok(unshift2d(&w, &coeffs))
    }
}

/// One-off 2D postprocess.
pub fn postprocess2d(u: &Field2D, bc: &EdgeTraces, grid: &Grid2D, spec: &FilterSpec) -> Result<Field2D> {
    spec.validate()?;
    Postprocessor2D::new(grid, spec).apply(u, bc)
}

/// Settings of a 2D run. `κ = kappa_fraction · κ_c^{2D}` on both axes,
/// computed from the finer spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solver2DConfig {
    pub step: StepConfig,
    pub filter: bool,
    pub kappa_fraction: f64,
    pub blowup_threshold: f64,
}

impl Solver2DConfig {
    pub fn new(dt: f64) -> Result<Self> {
        Ok(Self {
            step: StepConfig::new(dt)?,
            filter: true,
            kappa_fraction: 1.0,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        })
    }
}

/// Time loop for a [`Problem2D`].
pub struct Solver2D<'p> {
    problem: &'p dyn Problem2D,
    grid: Grid2D,
    config: Solver2DConfig,
    state: SchemeState2D,
    steps: usize,
    kappa: f64,
    post: Option<Postprocessor2D>,
    last_boundary: Option<EdgeTraces>,
}

impl<'p> Solver2D<'p> {
    pub fn new(problem: &'p dyn Problem2D, grid: Grid2D, config: Solver2DConfig) -> Result<Self> {
        config.step.validate()?;
        let u0 = Field2D::from_fn(&grid, problem.components(), |x, y, out| problem.initial(x, y, out));
        let h = grid.x.spacing().min(grid.y.spacing());
        let kappa = if config.filter {
            config.kappa_fraction * kappa_critical_2d(config.step.dt, h)
        } else {
            0.0
        };
        let post = if config.filter {
            let spec = FilterSpec::eighth_order(kappa);
            spec.validate()?;
            Some(Postprocessor2D::new(&grid, &spec))
        } else {
            None
        };
        Ok(Self {
            problem,
            grid,
            config,
            state: SchemeState2D {
                u_curr: u0.clone(),
                u_prev: u0,
                time: 0.0,
            },
            steps: 0,
            kappa,
            post,
            last_boundary: None,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn current(&self) -> &Field2D {
        &self.state.u_curr
    }

    /// Edge data imposed by the latest postprocess (filtered when the
    /// filter is on).
    pub fn last_boundary(&self) -> Option<&EdgeTraces> {
        self.last_boundary.as_ref()
    }

    pub fn advance(&mut self) -> Result<()> {
        let reaction: &dyn ReactionSystem = self.problem;
        let t_next = self.state.time + self.config.step.dt;
        let bc = edge_traces(self.problem, &self.grid, t_next);
        let raw = if self.steps == 0 {
            startup_step2d(&self.state.u_curr, self.state.time, &self.grid, reaction, &self.config.step, &bc)?
        } else {
            step2d(&self.state, &self.grid, reaction, &self.config.step, &bc)?
        };
        let (next, imposed) = match &self.post {
            Some(p) => (p.apply(&raw, &bc)?, p.filter_traces(&bc)),
            None => (raw, bc),
        };
        self.last_boundary = Some(imposed);
        self.state.u_prev = std::mem::replace(&mut self.state.u_curr, next);
        self.state.time = t_next;
        self.steps += 1;
        Ok(())
    }

    /// Runs up to `n_steps`; returns `Ok(true)` when no blow-up occurred.
    pub fn run(&mut self, n_steps: usize) -> Result<bool> {
        for _ in 0..n_steps {
            self.advance()?;
            if self.state.u_curr.is_blown_up(self.config.blowup_threshold) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
