//! Time loop for 1D problems: step, then postprocess.

use crate::ddm::{adapt_overlap, interface_energy, make_layout, DdPostprocessor, OverlapAdaptation, OverlapMonitor, SubdomainLayout};
use crate::dst::SineTransform;
use crate::error::{Error, Result};
use crate::field::{Field, DEFAULT_BLOWUP_THRESHOLD};
use crate::filter::{kappa_critical, FilterSpec, KappaAdaptSettings, KappaMonitor};
use crate::grid::Grid1D;
use crate::postprocess::{EndCurvature, Postprocessor1D, ShiftOrder};
use crate::problems::Problem1D;
use crate::reaction::ReactionSystem;
use crate::shift::{curvature_estimate, shift1};
use crate::stepper::{startup_step, step, SchemeState, StepConfig};

/// Postprocess settings. `κ = kappa_fraction · κ_c(Δt, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSettings {
    pub shift: ShiftOrder,
    pub kappa_fraction: f64,
    pub adapt_kappa: Option<KappaAdaptSettings>,
}

impl Default for FilterSettings {
    fn default() -> Self {
        Self {
            shift: ShiftOrder::First,
            kappa_fraction: 1.0,
            adapt_kappa: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum FilterMode {
    Off,
    #[default]
    On,
    With(FilterSettings),
}

impl FilterMode {
    pub fn settings(&self) -> Option<FilterSettings> {
        match *self {
            FilterMode::Off => None,
            FilterMode::On => Some(FilterSettings::default()),
            FilterMode::With(s) => Some(s),
        }
    }
}

/// Strip decomposition of the postprocess.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub n_subdomains: usize,
    pub overlap: usize,
    pub adapt_overlap: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub step: StepConfig,
    pub filter: FilterMode,
    pub decomposition: Option<Decomposition>,
    pub blowup_threshold: f64,
}

impl SolverConfig {
    pub fn new(dt: f64) -> Result<Self> {
        Ok(Self {
            step: StepConfig::new(dt)?,
            filter: FilterMode::On,
            decomposition: None,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        })
    }

    pub fn with_filter(mut self, filter: FilterMode) -> Self {
        self.filter = filter;
        self
    }

    pub fn with_decomposition(mut self, d: Decomposition) -> Self {
        self.decomposition = Some(d);
        self
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    BlowUp { step: usize },
    Failed { step: usize, error: Error },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub status: RunStatus,
    pub time: f64,
    pub kappa: f64,
    pub overlap: Option<usize>,
    pub overlap_saturated: bool,
    /// Per-component minimum over all nodes and all completed steps.
    pub min_values: Vec<f64>,
    /// `‖u^{n+1} − u^n‖∞ / Δt` of the last step.
    pub last_update_norm: f64,
}

impl RunSummary {
    pub fn stable(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

enum Post {
    Single(Postprocessor1D),
    Split {
        post: DdPostprocessor,
        monitor: Option<OverlapMonitor>,
        saturated: bool,
    },
}

/// Integrates a [`Problem1D`] with the two-step scheme and the filtering
/// postprocess after every step.
pub struct Solver1D<'p> {
    problem: &'p dyn Problem1D,
    grid: Grid1D,
    config: SolverConfig,
    state: SchemeState,
    steps: usize,
    kappa: f64,
    shift: ShiftOrder,
    post: Option<Post>,
    kappa_monitor: Option<(KappaMonitor, SineTransform)>,
    min_values: Vec<f64>,
    last_update_norm: f64,
}

impl<'p> Solver1D<'p> {
    pub fn new(problem: &'p dyn Problem1D, grid: Grid1D, config: SolverConfig) -> Result<Self> {
        config.step.validate()?;
        let m = problem.components();
        let u0 = Field::from_fn(&grid, m, |x, out| problem.initial(x, out));
        let settings = config.filter.settings();
        let kappa = settings.map_or(0.0, |s| s.kappa_fraction * kappa_critical(config.step.dt, grid.spacing()));
        let shift = settings.map_or(ShiftOrder::First, |s| s.shift);
        let post = match (settings, config.decomposition) {
            (None, _) => None,
            (Some(s), None) => {
                let spec = FilterSpec::eighth_order(kappa);
                spec.validate()?;
                Some(Post::Single(Postprocessor1D::new(grid.n_intervals(), spec, s.shift)))
            }
            (Some(s), Some(d)) => {
                FilterSpec::eighth_order(kappa).validate()?;
                let layout = make_layout(&grid, d.n_subdomains, d.overlap)?;
                Some(Post::Split {
                    post: DdPostprocessor::new(layout, kappa, s.shift),
                    monitor: d.adapt_overlap.then(OverlapMonitor::default),
                    saturated: false,
                })
            }
        };
        let kappa_monitor = settings
            .and_then(|s| s.adapt_kappa)
            .map(|a| (KappaMonitor::new(a), SineTransform::new(grid.n_intervals())));
        let min_values = (0..m).map(|c| u0.component(c).into_iter().fold(f64::INFINITY, f64::min)).collect();
        Ok(Self {
            problem,
            grid,
            state: SchemeState::new(u0.clone(), u0, 0.0)?,
            config,
            steps: 0,
            kappa,
            shift,
            post,
            kappa_monitor,
            min_values,
            last_update_norm: 0.0,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Current stretching factor (0 with the filter off).
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn current(&self) -> &Field {
        &self.state.u_curr
    }

    pub fn state(&self) -> &SchemeState {
        &self.state
    }

    pub fn layout(&self) -> Option<&SubdomainLayout> {
        match &self.post {
            Some(Post::Split { post, .. }) => Some(post.layout()),
            _ => None,
        }
    }

    /// Advances one step. The first call takes the one-step startup.
    pub fn advance(&mut self) -> Result<()> {
        let reaction: &dyn ReactionSystem = self.problem;
        let cfg = &self.config.step;
        let dt = cfg.dt;
        let t_next = self.state.time + dt;
        let bc = self.problem.boundary(t_next);
        let first = self.steps == 0;
        let raw = if first {
            startup_step(&self.state.u_curr, self.state.time, &self.grid, reaction, cfg, &bc)?
        } else {
            step(&self.state, &self.grid, reaction, cfg, &bc)?
        };
        let processed = self.postprocess(&raw, !first, t_next)?;

        let mut update = 0.0_f64;
        for (a, b) in processed.values().iter().zip(self.state.u_curr.values()) {
            update = update.max((a - b).abs());
        }
        self.last_update_norm = update / dt;
        let m = processed.components();
        for j in 0..processed.n_nodes() {
            for c in 0..m {
                self.min_values[c] = self.min_values[c].min(processed.get(j, c));
            }
        }
        let curr = std::mem::replace(&mut self.state.u_curr, processed);
        self.state.u_prev = curr;
        self.state.time = t_next;
        self.steps += 1;
        Ok(())
    }

    fn postprocess(&mut self, raw: &Field, use_prev: bool, t_next: f64) -> Result<Field> {
        let Some(post) = &mut self.post else {
            return Ok(raw.clone());
        };
        let reaction: &dyn ReactionSystem = self.problem;
        let dt = self.config.step.dt;
        let curr = &self.state.u_curr;
        let prev = use_prev.then_some(&self.state.u_prev);
        let m = raw.components();
        let curvature_at = |j: usize, out: &mut [f64]| {
            curvature_estimate(
                reaction,
                &[self.grid.node(j)],
                t_next,
                dt,
                raw.node(j),
                curr.node(j),
                prev.map(|p| p.node(j)),
                out,
            )
        };
        let out = match post {
            Post::Single(p) => {
                let (out, energy) = if self.shift == ShiftOrder::Third {
                    let n = self.grid.n_intervals();
                    let mut left = vec![0.0; m];
                    let mut right = vec![0.0; m];
                    curvature_at(0, &mut left);
                    curvature_at(n, &mut right);
                    let k = EndCurvature {
                        left: &left,
                        right: &right,
                    };
                    p.apply_with_energy(raw, Some(k), p.filter().top_band())?
                } else {
                    p.apply_with_energy(raw, None, p.filter().top_band())?
                };
                if let Some((monitor, _)) = &mut self.kappa_monitor {
                    if monitor.observe(energy) {
                        self.kappa *= monitor.settings().increase;
                        p.set_kappa(self.kappa);
                    }
                }
                out
            }
            Post::Split {
                post,
                monitor,
                saturated,
            } => {
                let curvature = (self.shift == ShiftOrder::Third).then(|| {
                    let mut k = Field::zeros(raw.n_nodes(), m);
                    for j in 0..raw.n_nodes() {
                        curvature_at(j, k.node_mut(j));
                    }
                    k
                });
                let out = post.apply(raw, &self.grid, curvature.as_ref())?;
                if let Some((kmon, transform)) = &mut self.kappa_monitor {
                    let retained = (self.grid.n_intervals() as f64 / self.kappa).ceil() as usize;
                    let band = (3 * retained) / 4 + 1..retained.min(self.grid.n_intervals() - 1) + 1;
                    if kmon.observe(band_energy(&out, transform, band)) {
                        self.kappa *= kmon.settings().increase;
                        post.set_kappa(self.kappa);
                    }
                }
                if let (Some(mon), false) = (monitor.as_mut(), *saturated) {
                    let history = mon.observe(interface_energy(&out, post.layout()));
                    let (layout, action) = adapt_overlap(history, post.layout());
                    match action {
                        OverlapAdaptation::Unchanged => {}
                        OverlapAdaptation::Increased { .. } => {
                            *post = DdPostprocessor::new(layout, self.kappa, self.shift);
                            mon.reset();
                        }
                        OverlapAdaptation::Saturated => *saturated = true,
                    }
                }
                out
            }
        };
        Ok(out)
    }

    /// Runs `n_steps` steps, stopping early on blow-up or solver failure.
    pub fn run(&mut self, n_steps: usize) -> RunSummary {
        let mut status = RunStatus::Completed;
        for _ in 0..n_steps {
            if let Err(error) = self.advance() {
                status = RunStatus::Failed {
                    step: self.steps + 1,
                    error,
                };
                break;
            }
            if self.state.u_curr.is_blown_up(self.config.blowup_threshold) {
                status = RunStatus::BlowUp { step: self.steps };
                break;
            }
        }
        self.summary(status)
    }

    /// Runs until `t_final`, which should be a multiple of `Δt`.
    pub fn run_until(&mut self, t_final: f64) -> RunSummary {
        let remaining = ((t_final - self.state.time) / self.config.step.dt).round().max(0.0) as usize;
        self.run(remaining)
    }

    fn summary(&self, status: RunStatus) -> RunSummary {
        let (overlap, overlap_saturated) = match &self.post {
            Some(Post::Split { post, saturated, .. }) => (Some(post.layout().overlap()), *saturated),
            _ => (None, false),
        };
        RunSummary {
            steps: self.steps,
            status,
            time: self.state.time,
            kappa: self.kappa,
            overlap,
            overlap_saturated,
            min_values: self.min_values.clone(),
            last_update_norm: self.last_update_norm,
        }
    }
}

fn band_energy(u: &Field, transform: &SineTransform, band: std::ops::Range<usize>) -> f64 {
    let n = transform.n_intervals();
    let (v, _) = shift1(u);
    let mut coeffs = vec![0.0; n - 1];
    let mut energy = 0.0;
    for c in 0..u.components() {
        let comp = v.component(c);
        transform.forward(&comp[1..n], &mut coeffs);
        energy += band.clone().map(|k| coeffs[k - 1] * coeffs[k - 1]).sum::<f64>();
    }
    energy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{DecayingModes, ManufacturedHeat, PerturbedHeat};

    fn heat(n: usize, ratio: f64, filter: FilterMode, steps: usize) -> RunSummary {
        let p = PerturbedHeat {
            mode: n - 1,
            amplitude: 1e-6,
        };
        let g = Grid1D::new(n).unwrap();
        let cfg = SolverConfig::new(g.dt_from_ratio(ratio)).unwrap().with_filter(filter);
        Solver1D::new(&p, g, cfg).unwrap().run(steps)
    }

    #[test]
    fn unfiltered_limit_brackets_ratio_one() {
        assert!(heat(32, 0.9, FilterMode::Off, 1500).stable());
        assert!(!heat(32, 1.2, FilterMode::Off, 1500).stable());
    }

    #[test]
    fn filter_stabilizes_large_ratio() {
        assert!(heat(32, 4.0, FilterMode::On, 1000).stable());
    }

    #[test]
    fn single_mode_tracks_semidiscrete_solution() {
        let p = DecayingModes {
            rate: 1.0,
            modes: vec![(1, 1.0), (2, 0.5)],
        };
        let g = Grid1D::new(64).unwrap();
        let dt = g.dt_from_ratio(0.5);
        let mut s = Solver1D::new(&p, g, SolverConfig::new(dt).unwrap().with_filter(FilterMode::Off)).unwrap();
        s.run(200);
        let t = s.time();
        for j in 0..=64 {
            let x = g.node(j);
            assert!((s.current().get(j, 0) - p.semidiscrete_solution(&g, x, t)).abs() < 1e-4);
        }
    }

    #[test]
    fn manufactured_case_is_accurate() {
        let p = ManufacturedHeat;
        let g = Grid1D::new(64).unwrap();
        let dt = 1.0 / 400.0;
        let filter = FilterMode::With(FilterSettings {
            shift: ShiftOrder::Third,
            ..FilterSettings::default()
        });
        let cfg = SolverConfig::new(dt).unwrap().with_filter(filter);
        let mut s = Solver1D::new(&p, g, cfg).unwrap();
        let summary = s.run_until(1.0);
        assert!(summary.stable());
        assert!((s.time() - 1.0).abs() < 1e-12);
        let err = (0..=64)
            .map(|j| (s.current().get(j, 0) - p.solution(g.node(j), 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 3e-3, "{err}");
    }

    #[test]
    fn decomposed_run_with_adaptation() {
        let p = ManufacturedHeat;
        let g = Grid1D::new(128).unwrap();
        let cfg = SolverConfig::new(g.dt_from_ratio(2.0)).unwrap().with_decomposition(Decomposition {
            n_subdomains: 4,
            overlap: 4,
            adapt_overlap: true,
        });
        let mut s = Solver1D::new(&p, g, cfg).unwrap();
        let summary = s.run(100);
        assert!(summary.overlap.unwrap() >= 4);
        assert!(summary.overlap.unwrap() <= 16);
    }
}
