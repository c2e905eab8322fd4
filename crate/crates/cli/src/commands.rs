//! Subcommand bodies.

use log::info;
use rdfilter::bench::{run_single, RunSpec};
use rdfilter::dst::SineTransform;
use rdfilter::filter::{KappaAdaptSettings, SpectralFilter};
use rdfilter::shift::ShiftCoeffs;
use rdfilter::stability::certify_filtered_modes;
use rdfilter::{
    kappa_critical, make_layout, manufactured_heat_case, run_accuracy_sweep, run_dd_study, shift1, sigma8, unshift,
    AccuracySweep, DdStudy, Decomposition, Error, Field, Field2D, FilterMode, FilterSettings, FilterSpec, Grid1D,
    Grid2D, ManufacturedHeat2D, PerturbedHeat, PolynomialReaction, PredatorPrey, Problem1D, Problem2D, RunStatus,
    Solver1D, Solver2D, Solver2DConfig, SolverConfig, SweepRow,
};
use thiserror::Error;

use crate::config::{ConfigError, ProblemKind, RunConfig, StepSize};
use crate::output::emit_csv;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Setup(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Setup(_) => 1,
            CliError::Numerical(_) | CliError::Output(_) => 2,
        }
    }
}

fn library_error(e: Error) -> CliError {
    match e {
        Error::NewtonDivergence { .. } | Error::UnshiftedInput { .. } | Error::IncompatibleCorners { .. } => {
            CliError::Numerical(e.to_string())
        }
        _ => CliError::Setup(e.to_string()),
    }
}

fn problem_1d(cfg: &RunConfig) -> Result<Box<dyn Problem1D>, CliError> {
    Ok(match cfg.problem {
        ProblemKind::Heat1d => Box::new(manufactured_heat_case()),
        ProblemKind::PredPrey1d => Box::new(
            PredatorPrey::default()
                .with_coupling(cfg.coupling)
                .with_excitation(cfg.excited),
        ),
        ProblemKind::Custom => Box::new(PolynomialReaction {
            coefficients: cfg.coefficients,
            left: cfg.left,
            right: cfg.right,
        }),
        ProblemKind::Heat2d => {
            return Err(CliError::Config(ConfigError::Invalid {
                key: "problem".into(),
                value: "heat2d".into(),
                reason: "this subcommand is 1D only".into(),
            }))
        }
    })
}

fn filter_mode(cfg: &RunConfig) -> FilterMode {
    if !cfg.filter {
        return FilterMode::Off;
    }
    FilterMode::With(FilterSettings {
        shift: cfg.shift_order,
        kappa_fraction: cfg.kappa_fraction,
        adapt_kappa: cfg.kappa_adapt.then(KappaAdaptSettings::default),
    })
}

/// Single run. A blow-up is an error with exit code 2; the row is still
/// written first.
pub fn run(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    if cfg.problem == ProblemKind::Heat2d {
        return run_2d(cfg);
    }
    let problem = problem_1d(cfg)?;
    let grid = Grid1D::new(cfg.n).map_err(library_error)?;
    let (steps, dt) = cfg.steps_1d(grid.spacing());
    let decomposition = (cfg.n_subdomains > 1).then_some(Decomposition {
        n_subdomains: cfg.n_subdomains,
        overlap: cfg.overlap,
        adapt_overlap: cfg.overlap_adapt,
    });
    let mut solver_cfg = SolverConfig::new(dt).map_err(library_error)?.with_filter(filter_mode(cfg));
    solver_cfg.decomposition = decomposition;
    solver_cfg.blowup_threshold = cfg.blowup_threshold;
    // surface setup problems as config errors before running
    Solver1D::new(problem.as_ref(), grid, solver_cfg.clone()).map_err(library_error)?;
    let spec = RunSpec {
        n: cfg.n,
        dt,
        steps,
        filter: filter_mode(cfg),
        decomposition,
        timing: cfg.timing,
    };
    info!("{}: N={} dt={dt:e} steps={steps}", problem.name(), cfg.n);
    let (row, summary, _) = run_single(problem.as_ref(), &spec);
    let rows = vec![row];
    emit_csv(&rows, cfg.output.as_deref())?;
    match summary.status {
        RunStatus::Completed => Ok(rows),
        RunStatus::BlowUp { step } => Err(CliError::Numerical(format!("blow-up at step {step}"))),
        RunStatus::Failed { step, error } => Err(CliError::Numerical(format!("step {step}: {error}"))),
    }
}

fn run_2d(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let grid = Grid2D::new(cfg.n, cfg.ny).map_err(library_error)?;
    let h = grid.x.spacing().min(grid.y.spacing());
    let (steps, dt) = cfg.steps_1d(h);
    let problem = ManufacturedHeat2D;
    let mut scfg = Solver2DConfig::new(dt).map_err(library_error)?;
    scfg.filter = cfg.filter;
    scfg.kappa_fraction = cfg.kappa_fraction;
    scfg.blowup_threshold = cfg.blowup_threshold;
    let start = std::time::Instant::now();
    let mut solver = Solver2D::new(&problem, grid, scfg).map_err(library_error)?;
    info!("heat2d: {}x{} dt={dt:e} steps={steps}", cfg.n, cfg.ny);
    let outcome = solver.run(steps);
    let stable = matches!(outcome, Ok(true));
    let (err_l2, err_linf) = if stable {
        let exact = Field2D::from_fn(&grid, 1, |x, y, o| {
            problem.exact(x, y, solver.time(), o);
        });
        error_norms_2d(solver.current(), &exact, &grid)
    } else {
        (f64::NAN, f64::NAN)
    };
    let row = SweepRow {
        n: cfg.n,
        dt,
        ratio: 3.0 * dt / (h * h),
        shift_order: if cfg.filter { 1 } else { 0 },
        kappa: solver.kappa(),
        n_subdomains: 1,
        overlap: 0,
        err_l2,
        err_linf,
        stable,
        steps: solver.steps(),
        wall_ms: if cfg.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 },
        saturated: false,
    };
    let rows = vec![row];
    emit_csv(&rows, cfg.output.as_deref())?;
    match outcome {
        Ok(true) => Ok(rows),
        Ok(false) => Err(CliError::Numerical(format!("blow-up at step {}", solver.steps()))),
        Err(e) => Err(CliError::Numerical(e.to_string())),
    }
}

/// Trapezoidal `L²` and sup norms on the square.
pub fn error_norms_2d(u: &Field2D, reference: &Field2D, grid: &Grid2D) -> (f64, f64) {
    let (nx, ny) = u.shape();
    let (mut sum, mut sup) = (0.0_f64, 0.0_f64);
    for j in 0..=ny {
        let wy = if j == 0 || j == ny { 0.5 } else { 1.0 };
        for i in 0..=nx {
            let wx = if i == 0 || i == nx { 0.5 } else { 1.0 };
            for c in 0..u.components() {
                let d = u.get(i, j, c) - reference.get(i, j, c);
                sum += wx * wy * d * d;
                sup = sup.max(d.abs());
            }
        }
    }
    ((grid.x.spacing() * grid.y.spacing() * sum).sqrt(), sup)
}

pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let problem = problem_1d(cfg)?;
    if let StepSize::Dt(_) = cfg.step {
        log::warn!("sweep uses sweep_ratios; dt is ignored");
    }
    let study = AccuracySweep {
        grid_sizes: cfg.sweep_n.clone(),
        ratios: cfg.sweep_ratios.clone(),
        shift_orders: cfg.sweep_shifts.clone(),
        t_final: cfg.t_final,
        filter: cfg.filter,
        kappa_fraction: cfg.kappa_fraction,
        timing: cfg.timing,
    };
    let rows = run_accuracy_sweep(problem.as_ref(), &study);
    emit_csv(&rows, cfg.output.as_deref())?;
    Ok(rows)
}

pub fn dd(cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let problem = problem_1d(cfg)?;
    let grid = Grid1D::new(cfg.n).map_err(library_error)?;
    if cfg.n_subdomains > 1 {
        for &overlap in &cfg.overlaps {
            make_layout(&grid, cfg.n_subdomains, overlap).map_err(library_error)?;
        }
    }
    let study = DdStudy {
        n: cfg.n,
        n_subdomains: cfg.n_subdomains,
        overlaps: cfg.overlaps.clone(),
        shift: cfg.shift_order,
        steps: cfg.dd_steps,
        resolution: cfg.dd_resolution,
        max_ratio: cfg.dd_max_ratio,
        timing: cfg.timing,
    };
    let rows = run_dd_study(problem.as_ref(), &study);
    for r in &rows {
        if r.saturated {
            log::warn!("overlap {} reaches the N/(2N_d) cap", r.overlap);
        }
    }
    emit_csv(&rows, cfg.output.as_deref())?;
    Ok(rows)
}

/// One invariant check of `selftest`.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Quick invariant suite; all checks together run well under a second.
pub fn selftest() -> Vec<Check> {
    let mut out = Vec::new();

    let s = [sigma8(0.0), sigma8(0.5), sigma8(1.0)];
    let dev = (s[0] - 1.0).abs().max((s[1] - 0.5).abs()).max(s[2].abs());
    out.push(check("filter values", dev <= 1e-14, format!("max deviation {dev:.1e}")));

    let n = 64;
    let t = SineTransform::new(n);
    let v: Vec<f64> = (1..n).map(|j| ((j * 37 % 23) as f64 - 11.0) / 7.0).collect();
    let (mut c, mut back) = (vec![0.0; n - 1], vec![0.0; n - 1]);
    t.forward(&v, &mut c);
    t.inverse(&c, &mut back);
    let dev = v.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.push(check("sine transform round trip", dev <= 1e-12, format!("{dev:.1e}")));

    let grid = Grid1D::new(n).expect("grid");
    let dt = grid.dt_from_ratio(8.0);
    let kappa = kappa_critical(dt, grid.spacing());
    let cert = certify_filtered_modes(&grid, dt, &FilterSpec::eighth_order(kappa));
    out.push(check(
        "root certificate at ratio 8",
        cert.certifies(1e-12),
        format!("kappa {kappa:.4}"),
    ));

    let grid128 = Grid1D::new(128).expect("grid");
    let pou = make_layout(&grid128, 4, 8).map(|layout| {
        let mut total = vec![0.0; 129];
        for (i, &(lo, _)) in layout.ranges().iter().enumerate() {
            for (j, w) in layout.weights(i).into_iter().enumerate() {
                total[lo + j] += w;
            }
        }
        total.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    });
    match pou {
        Ok(dev) => out.push(check("partition of unity", dev <= 1e-14, format!("{dev:.1e}"))),
        Err(e) => out.push(check("partition of unity", false, e.to_string())),
    }

    let u = Field::from_scalar_fn(&grid, |x| x.exp() + (3.0 * x).sin());
    let (shifted, coeffs) = shift1(&u);
    let identity = SpectralFilter::new(n, FilterSpec::eighth_order(1e-9));
    let dev = identity
        .apply(&shifted)
        .map(|f| {
            let back = unshift(&f, &ShiftCoeffs::First(coeffs));
            back.values()
                .iter()
                .zip(u.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    out.push(check("shift round trip", dev <= 1e-12, format!("{dev:.1e}")));

    let perturbed = PerturbedHeat {
        mode: n - 1,
        amplitude: 1e-6,
    };
    let limit = |ratio: f64| {
        let cfg = SolverConfig::new(grid.dt_from_ratio(ratio))
            .expect("config")
            .with_filter(FilterMode::Off);
        Solver1D::new(&perturbed, grid, cfg).map(|mut s| s.run(2000).stable()).unwrap_or(false)
    };
    let (below, above) = (limit(0.9), limit(1.2));
    out.push(check(
        "explicit limit",
        below && !above,
        format!("ratio 0.9 stable {below}, ratio 1.2 stable {above}"),
    ));

    let heat = manufactured_heat_case();
    let single = SolverConfig::new(grid.dt_from_ratio(4.0)).expect("config");
    let split = single.clone().with_decomposition(Decomposition {
        n_subdomains: 1,
        overlap: 8,
        adapt_overlap: false,
    });
    let finals: Vec<Option<Field>> = [single, split]
        .into_iter()
        .map(|c| {
            let mut s = Solver1D::new(&heat, grid, c).ok()?;
            s.run(100).stable().then(|| s.current().clone())
        })
        .collect();
    let dev = match (&finals[0], &finals[1]) {
        (Some(a), Some(b)) => a
            .values()
            .iter()
            .zip(b.values())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max),
        _ => f64::INFINITY,
    };
    out.push(check("one subdomain equals single domain", dev <= 1e-12, format!("{dev:.1e}")));

    let grid2 = Grid2D::new(16, 16).expect("grid");
    let h = grid2.x.spacing();
    let problem2 = ManufacturedHeat2D;
    let edges = Solver2DConfig::new(h * h / 3.0)
        .and_then(|c| Solver2D::new(&problem2, grid2, c))
        .and_then(|mut s| {
            let stable = s.run(100)?;
            let bc = s.last_boundary().cloned().expect("stepped");
            let u = s.current();
            let dev = (0..=16)
                .map(|i| (u.get(i, 0, 0) - bc.bottom[i]).abs().max((u.get(i, 16, 0) - bc.top[i]).abs()))
                .chain((0..=16).map(|j| (u.get(0, j, 0) - bc.left[j]).abs().max((u.get(16, j, 0) - bc.right[j]).abs())))
                .fold(0.0, f64::max);
            Ok((stable, dev))
        });
    match edges {
        Ok((stable, dev)) => out.push(check(
            "2D edges at twice the explicit limit",
            stable && dev == 0.0,
            format!("stable {stable}, edge deviation {dev:.1e}"),
        )),
        Err(e) => out.push(check("2D edges at twice the explicit limit", false, e.to_string())),
    }

    out
}
