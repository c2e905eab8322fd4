//! Explicit time stepping for stiff reaction-diffusion systems, stabilized
//! by filtering the solution after every step.
//!
//! Each step treats diffusion explicitly with a two-step extrapolation and
//! the reaction implicitly, one small Newton solve per grid node. Steps
//! larger than the explicit limit `Δt < h²/3` are made stable by a
//! postprocess: subtract a few cosine modes so the remainder extends to an
//! odd periodic function, damp its high sine modes with an order-8 filter,
//! and add the modes back.
//!
//! ```
//! use rdfilter::{Grid1D, ManufacturedHeat, Solver1D, SolverConfig};
//!
//! let grid = Grid1D::new(64).unwrap();
//! // four times the explicit limit
//! let dt = grid.dt_from_ratio(4.0);
//! let problem = ManufacturedHeat;
//! let mut solver = Solver1D::new(&problem, grid, SolverConfig::new(dt).unwrap()).unwrap();
//! let summary = solver.run(200);
//! assert!(summary.stable());
//! ```

pub mod bench;
pub mod ddm;
pub mod dst;
pub mod error;
pub mod field;
pub mod filter;
pub mod grid;
pub mod postprocess;
pub mod problems;
pub mod reaction;
pub mod shift;
pub mod solver1d;
pub mod solver2d;
pub mod stability;
pub mod stepper;

pub use bench::{error_norms, run_accuracy_sweep, run_dd_study, run_predator_prey, AccuracySweep, DdStudy, SweepRow};
pub use ddm::{make_layout, postprocess_dd, SubdomainLayout};
pub use error::{Error, Result};
pub use field::{Field, Field2D};
pub use filter::{apply_filter, kappa_critical, kappa_critical_2d, sigma8, FilterSpec};
pub use grid::{discrete_laplacian_symbol, make_grid_1d, Grid1D, Grid2D};
pub use postprocess::{postprocess_1d, ShiftOrder};
pub use problems::{
    manufactured_heat_case, DecayingModes, ManufacturedHeat, ManufacturedHeat2D, PerturbedHeat, PolynomialReaction,
    PredatorCoupling, PredatorPrey, Problem1D,
};
pub use reaction::ReactionSystem;
pub use shift::{shift1, shift2d, shift3, unshift, unshift2d, EdgeTraces};
pub use solver1d::{Decomposition, FilterMode, FilterSettings, RunStatus, RunSummary, Solver1D, SolverConfig};
pub use solver2d::{postprocess2d, step2d, Problem2D, Solver2D, Solver2DConfig};
pub use stepper::{startup_step, step, BoundaryValues, SchemeState, StepConfig};
