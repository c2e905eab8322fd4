//! Experiment harness: accuracy sweeps over `3Δt/h²`, predator-prey runs
//! and overlap studies. Rows come back in configuration order.

use std::time::Instant;

use rayon::prelude::*;

use crate::field::Field;
use crate::grid::Grid1D;
use crate::postprocess::ShiftOrder;
use crate::problems::{PredatorPrey, Problem1D};
use crate::solver1d::{Decomposition, FilterMode, FilterSettings, RunStatus, RunSummary, Solver1D, SolverConfig};

/// One run of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub dt: f64,
    /// `3Δt/h²` of the step actually taken.
    pub ratio: f64,
    pub shift_order: u8,
    /// Final stretching factor, 0 with the filter off.
    pub kappa: f64,
    pub n_subdomains: usize,
    pub overlap: usize,
    pub err_l2: f64,
    pub err_linf: f64,
    pub stable: bool,
    pub steps: usize,
    pub wall_ms: f64,
    pub saturated: bool,
}

/// Trapezoidal `L²` and sup norms of `u − reference`, over all components.
pub fn error_norms(u: &Field, reference: &Field) -> (f64, f64) {
    assert!(u.same_shape(reference), "fields must share grid and components");
    let n = u.n_nodes() - 1;
    let h = std::f64::consts::PI / n as f64;
    let m = u.components();
    let (mut sum, mut sup) = (0.0_f64, 0.0_f64);
    for j in 0..=n {
        let w = if j == 0 || j == n { 0.5 } else { 1.0 };
        for c in 0..m {
            let d = u.get(j, c) - reference.get(j, c);
            sum += w * d * d;
            sup = sup.max(d.abs());
        }
    }
    ((h * sum).sqrt(), sup)
}

/// Step count and step size landing exactly on `t_final` with a step no
/// larger than the one given by `ratio`.
pub fn steps_for(grid: &Grid1D, ratio: f64, t_final: f64) -> (usize, f64) {
    let nominal = grid.dt_from_ratio(ratio);
    let steps = (t_final / nominal - 1e-9).ceil().max(1.0) as usize;
    (steps, t_final / steps as f64)
}

/// Settings of one 1D run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub filter: FilterMode,
    pub decomposition: Option<Decomposition>,
    pub timing: bool,
}

/// Runs one configuration and measures the final error against the exact
/// solution (NaN when the problem has none or the run failed).
pub fn run_single(problem: &dyn Problem1D, spec: &RunSpec) -> (SweepRow, RunSummary, Option<Field>) {
    let start = Instant::now();
    let grid = match Grid1D::new(spec.n) {
        Ok(g) => g,
        Err(e) => return failed_row(spec, e),
    };
    let mut cfg = match SolverConfig::new(spec.dt) {
        Ok(c) => c.with_filter(spec.filter),
        Err(e) => return failed_row(spec, e),
    };
    cfg.decomposition = spec.decomposition;
    let mut solver = match Solver1D::new(problem, grid, cfg) {
        Ok(s) => s,
        Err(e) => return failed_row(spec, e),
    };
    let summary = solver.run(spec.steps);
    let stable = summary.stable();
    let (err_l2, err_linf) = if stable {
        exact_field(problem, &grid, solver.time())
            .map(|r| error_norms(solver.current(), &r))
            .unwrap_or((f64::NAN, f64::NAN))
    } else {
        (f64::NAN, f64::NAN)
    };
    let wall_ms = if spec.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    let row = SweepRow {
        n: spec.n,
        dt: spec.dt,
        ratio: grid.ratio_from_dt(spec.dt),
        shift_order: spec.filter.settings().map_or(0, |s| s.shift.order()),
        kappa: summary.kappa,
        n_subdomains: spec.decomposition.map_or(1, |d| d.n_subdomains),
        overlap: summary.overlap.unwrap_or(0),
        err_l2,
        err_linf,
        stable,
        steps: summary.steps,
        wall_ms,
        saturated: summary.overlap_saturated,
    };
    let last = stable.then(|| solver.current().clone());
    (row, summary, last)
}

fn failed_row(spec: &RunSpec, error: crate::Error) -> (SweepRow, RunSummary, Option<Field>) {
    let row = SweepRow {
        n: spec.n,
        dt: spec.dt,
        ratio: 3.0 * spec.dt * (spec.n as f64 / std::f64::consts::PI).powi(2),
        shift_order: spec.filter.settings().map_or(0, |s| s.shift.order()),
        kappa: 0.0,
        n_subdomains: spec.decomposition.map_or(1, |d| d.n_subdomains),
        overlap: spec.decomposition.map_or(0, |d| d.overlap),
        err_l2: f64::NAN,
        err_linf: f64::NAN,
        stable: false,
        steps: 0,
        wall_ms: 0.0,
        saturated: false,
    };
    let summary = RunSummary {
        steps: 0,
        status: RunStatus::Failed { step: 0, error },
        time: 0.0,
        kappa: 0.0,
        overlap: None,
        overlap_saturated: false,
        min_values: Vec::new(),
        last_update_norm: f64::NAN,
    };
    (row, summary, None)
}

/// Exact solution of `problem` sampled on `grid`, if known.
pub fn exact_field(problem: &dyn Problem1D, grid: &Grid1D, t: f64) -> Option<Field> {
    let m = problem.components();
    let mut known = true;
    let f = Field::from_fn(grid, m, |x, out| known &= problem.exact(x, t, out));
    known.then_some(f)
}

/// Accuracy sweep description. Every `(N, ratio, shift)` triple is one row.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySweep {
    pub grid_sizes: Vec<usize>,
    pub ratios: Vec<f64>,
    pub shift_orders: Vec<ShiftOrder>,
    pub t_final: f64,
    pub filter: bool,
    pub kappa_fraction: f64,
    pub timing: bool,
}

impl Default for AccuracySweep {
    fn default() -> Self {
        Self {
            grid_sizes: vec![32, 64],
            ratios: vec![0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            shift_orders: vec![ShiftOrder::First, ShiftOrder::Third],
            t_final: 1.0,
            filter: true,
            kappa_fraction: 1.0,
            timing: false,
        }
    }
}

/// Integrates `case` to `t_final` for every configuration and records the
/// final-time errors. Failed runs are rows with `stable = false`.
pub fn run_accuracy_sweep(case: &dyn Problem1D, sweep: &AccuracySweep) -> Vec<SweepRow> {
    let mut specs = Vec::new();
    for &n in &sweep.grid_sizes {
        for &ratio in &sweep.ratios {
            for &shift in &sweep.shift_orders {
                let (steps, dt) = match Grid1D::new(n) {
                    Ok(g) => steps_for(&g, ratio, sweep.t_final),
                    Err(_) => (0, f64::NAN),
                };
                let filter = if sweep.filter {
                    FilterMode::With(FilterSettings {
                        shift,
                        kappa_fraction: sweep.kappa_fraction,
                        adapt_kappa: None,
                    })
                } else {
                    FilterMode::Off
                };
                specs.push(RunSpec {
                    n,
                    dt,
                    steps,
                    filter,
                    decomposition: None,
                    timing: sweep.timing,
                });
            }
        }
    }
    specs.par_iter().map(|s| run_single(case, s).0).collect()
}

/// One sample of a predator-prey trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub u_mid: f64,
    pub v_mid: f64,
    pub min_u: f64,
    pub min_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredatorPreyReport {
    pub row: SweepRow,
    pub min_u: f64,
    pub min_v: f64,
    /// `‖u^{n+1} − u^n‖∞ / Δt` at the last step.
    pub update_norm: f64,
    pub trajectory: Vec<TrajectoryPoint>,
}

/// Integrates the predator-prey case for `steps` steps at `ratio` and
/// records minima over the run. With `reference_ratio` the final state is
/// compared against an unfiltered run at that ratio ending at the same time.
pub fn run_predator_prey(
    case: &PredatorPrey,
    n: usize,
    ratio: f64,
    steps: usize,
    shift: ShiftOrder,
    reference_ratio: Option<f64>,
    timing: bool,
) -> crate::Result<PredatorPreyReport> {
    let start = Instant::now();
    let grid = Grid1D::new(n)?;
    let dt = grid.dt_from_ratio(ratio);
    let filter = FilterMode::With(FilterSettings {
        shift,
        ..FilterSettings::default()
    });
    let mut solver = Solver1D::new(case, grid, SolverConfig::new(dt)?.with_filter(filter))?;
    let mut trajectory = Vec::with_capacity(steps);
    let mut status = RunStatus::Completed;
    for _ in 0..steps {
        if let Err(error) = solver.advance() {
            status = RunStatus::Failed {
                step: solver.steps() + 1,
                error,
            };
            break;
        }
        let u = solver.current();
        if u.is_blown_up(solver.config().blowup_threshold) {
            status = RunStatus::BlowUp { step: solver.steps() };
            break;
        }
        let mid = u.node(n / 2);
        let (mut min_u, mut min_v) = (f64::INFINITY, f64::INFINITY);
        for j in 0..=n {
            min_u = min_u.min(u.get(j, 0));
            min_v = min_v.min(u.get(j, 1));
        }
        trajectory.push(TrajectoryPoint {
            t: solver.time(),
            u_mid: mid[0],
            v_mid: mid[1],
            min_u,
            min_v,
        });
    }
    let summary = solver.run(0);
    let stable = status == RunStatus::Completed;
    let (err_l2, err_linf) = match (reference_ratio, stable) {
        (Some(r), true) => {
            let (ref_steps, ref_dt) = steps_for(&grid, r, solver.time());
            let spec = RunSpec {
                n,
                dt: ref_dt,
                steps: ref_steps,
                filter: FilterMode::Off,
                decomposition: None,
                timing: false,
            };
            match run_single(case, &spec).2 {
                Some(reference) => error_norms(solver.current(), &reference),
                None => (f64::NAN, f64::NAN),
            }
        }
        _ => (f64::NAN, f64::NAN),
    };
    let row = SweepRow {
        n,
        dt,
        ratio: grid.ratio_from_dt(dt),
        shift_order: shift.order(),
        kappa: summary.kappa,
        n_subdomains: 1,
        overlap: 0,
        err_l2,
        err_linf,
        stable,
        steps: solver.steps(),
        wall_ms: if timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        saturated: false,
    };
    Ok(PredatorPreyReport {
        row,
        min_u: summary.min_values[0],
        min_v: summary.min_values[1],
        update_norm: summary.last_update_norm,
        trajectory,
    })
}

/// Overlap study description.
#[derive(Debug, Clone, PartialEq)]
pub struct DdStudy {
    pub n: usize,
    pub n_subdomains: usize,
    pub overlaps: Vec<usize>,
    pub shift: ShiftOrder,
    /// Steps without blow-up that count as stable.
    pub steps: usize,
    /// Bisection stops when the bracket is narrower than this.
    pub resolution: f64,
    /// Ratios above this are not explored.
    pub max_ratio: f64,
    pub timing: bool,
}

impl Default for DdStudy {
    fn default() -> Self {
        Self {
            n: 128,
            n_subdomains: 4,
            overlaps: vec![4, 8, 16],
            shift: ShiftOrder::First,
            steps: 500,
            resolution: 0.1,
            max_ratio: 32.0,
            timing: false,
        }
    }
}

fn dd_spec(study: &DdStudy, grid: &Grid1D, overlap: usize, ratio: f64) -> RunSpec {
    RunSpec {
        n: study.n,
        dt: grid.dt_from_ratio(ratio),
        steps: study.steps,
        filter: FilterMode::With(FilterSettings {
            shift: study.shift,
            ..FilterSettings::default()
        }),
        decomposition: (study.n_subdomains > 1).then_some(Decomposition {
            n_subdomains: study.n_subdomains,
            overlap,
            adapt_overlap: false,
        }),
        timing: false,
    }
}

/// Largest stable `3Δt/h²` for one overlap: doubling from 1 to bracket the
/// limit, then bisection down to `study.resolution`. Returns the last stable
/// ratio (0 if even the explicit limit fails) and its row.
pub fn max_stable_ratio(case: &dyn Problem1D, study: &DdStudy, overlap: usize) -> (f64, SweepRow) {
    let grid = Grid1D::new(study.n).expect("valid grid size");
    let try_ratio = |r: f64| run_single(case, &dd_spec(study, &grid, overlap, r)).0;
    let mut lo = 0.0;
    let mut best = None;
    let mut hi = None;
    let mut r = 1.0;
    while r <= study.max_ratio {
        let row = try_ratio(r);
        if row.stable {
            lo = r;
            best = Some(row);
            r *= 2.0;
        } else {
            hi = Some(r);
            break;
        }
    }
    if let Some(mut hi) = hi {
        while hi - lo > study.resolution {
            let mid = 0.5 * (lo + hi);
            let row = try_ratio(mid);
            if row.stable {
                lo = mid;
                best = Some(row);
            } else {
                hi = mid;
            }
        }
    }
    let row = best.unwrap_or_else(|| try_ratio(lo.max(study.resolution)));
    (lo, row)
}

/// One row per overlap with the bisected maximal stable ratio in `ratio`.
/// Overlaps at or beyond the cap `N/(2N_d)` are flagged `saturated`.
pub fn run_dd_study(case: &dyn Problem1D, study: &DdStudy) -> Vec<SweepRow> {
    let cap = study.n / (2 * study.n_subdomains.max(1));
    study
        .overlaps
        .par_iter()
        .map(|&overlap| {
            let start = Instant::now();
            let (_, mut row) = max_stable_ratio(case, study, overlap);
            row.saturated = study.n_subdomains > 1 && overlap >= cap;
            row.overlap = if study.n_subdomains > 1 { overlap } else { 0 };
            row.wall_ms = if study.timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ManufacturedHeat;

    #[test]
    fn error_norm_examples() {
        let g = Grid1D::new(64).unwrap();
        let zero = Field::zeros(65, 1);
        let s = Field::from_scalar_fn(&g, f64::sin);
        assert_eq!(error_norms(&s, &s), (0.0, 0.0));
        let (l2, _) = error_norms(&s, &zero);
        assert!((l2 - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-3);
        let one = Field::from_scalar_fn(&g, |_| 1.0);
        assert_eq!(error_norms(&one, &zero).1, 1.0);
    }

    #[test]
    fn steps_land_on_final_time() {
        let g = Grid1D::new(32).unwrap();
        let (steps, dt) = steps_for(&g, 2.0, 1.0);
        assert!((steps as f64 * dt - 1.0).abs() < 1e-12);
        assert!(dt <= g.dt_from_ratio(2.0) * (1.0 + 1e-12));
    }

    #[test]
    fn sweep_rows_follow_config_order_and_reproduce() {
        let sweep = AccuracySweep {
            grid_sizes: vec![16, 32],
            ratios: vec![0.5, 2.0],
            shift_orders: vec![ShiftOrder::First],
            t_final: 0.1,
            ..AccuracySweep::default()
        };
        let a = run_accuracy_sweep(&ManufacturedHeat, &sweep);
        let b = run_accuracy_sweep(&ManufacturedHeat, &sweep);
        assert_eq!(a.len(), 4);
        assert_eq!((a[0].n, a[3].n), (16, 32));
        assert!(a[1].ratio > a[0].ratio);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.err_l2.to_bits(), y.err_l2.to_bits());
            assert!(x.stable);
            assert!((x.ratio - 3.0 * x.dt / (std::f64::consts::PI / x.n as f64).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn below_limit_filter_is_nearly_inert() {
        let base = AccuracySweep {
            grid_sizes: vec![32],
            ratios: vec![0.5],
            shift_orders: vec![ShiftOrder::First],
            t_final: 1.0,
            ..AccuracySweep::default()
        };
        let on = run_accuracy_sweep(&ManufacturedHeat, &base)[0].err_linf;
        let off = run_accuracy_sweep(&ManufacturedHeat, &AccuracySweep { filter: false, ..base })[0].err_linf;
        assert!(on <= 2.0 * off && off <= 2.0 * on, "{on} {off}");
    }

    #[test]
    fn failed_configuration_is_recorded() {
        let sweep = AccuracySweep {
            grid_sizes: vec![2],
            ratios: vec![1.0],
            shift_orders: vec![ShiftOrder::First],
            ..AccuracySweep::default()
        };
        let rows = run_accuracy_sweep(&ManufacturedHeat, &sweep);
        assert_eq!(rows.len(), 1);
        assert!(!rows[0].stable);
    }
}
