//! Uniform grids on `[0, π]` and `[0, π]²`.
//!
//! Both endpoints are grid nodes: index `0` and index `N` carry the
//! Dirichlet data, so the boundary shifts can read them directly.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Smallest admissible number of intervals. The third-order shift uses four
/// independent cosine modes.
pub const MIN_INTERVALS: usize = 4;

/// Uniform grid `x_j = j h`, `h = π / N`, `j = 0..=N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(n_intervals: usize) -> Result<Self> {
        if n_intervals < MIN_INTERVALS {
            return Err(Error::GridTooCoarse(n_intervals));
        }
        Ok(Self {
            n: n_intervals,
            h: PI / n_intervals as f64,
        })
    }

    /// Number of intervals `N`.
    pub fn n_intervals(&self) -> usize {
        self.n
    }

    /// Number of nodes, `N + 1`.
    pub fn n_nodes(&self) -> usize {
        self.n + 1
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Node coordinate. Computed as `π j / N` so that `x_N == π` exactly.
    pub fn node(&self, j: usize) -> f64 {
        PI * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }

    /// Converts the normalized ratio `3Δt/h²` to a time step.
    pub fn dt_from_ratio(&self, ratio: f64) -> f64 {
        ratio * self.h * self.h / 3.0
    }

    /// Normalized time-step ratio `3Δt/h²`.
    pub fn ratio_from_dt(&self, dt: f64) -> f64 {
        3.0 * dt / (self.h * self.h)
    }
}

/// Builds the grid with `n_intervals` intervals on `[0, π]`.
pub fn make_grid_1d(n_intervals: usize) -> Result<Grid1D> {
    Grid1D::new(n_intervals)
}

/// Tensor-product grid on `[0, π]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub x: Grid1D,
    pub y: Grid1D,
}

impl Grid2D {
    pub fn new(n_intervals_x: usize, n_intervals_y: usize) -> Result<Self> {
        Ok(Self {
            x: Grid1D::new(n_intervals_x)?,
            y: Grid1D::new(n_intervals_y)?,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.x.n_nodes() * self.y.n_nodes()
    }

    /// Linear node index of `(i, j)`, `i` along x.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.x.n_nodes() + i
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.x.n_intervals() || j == self.y.n_intervals()
    }
}

/// Symbol of the three-point second difference at spacing `h` and integer
/// wavenumber `k`: `2 h⁻² (cos(hk) − 1)`.
pub fn laplacian_symbol(h: f64, k: usize) -> f64 {
    2.0 / (h * h) * ((h * k as f64).cos() - 1.0)
}

/// Eigenvalue `Λ_k` of the discrete second difference on `grid` for the
/// sine mode `sin(k x)`. Always non-positive.
pub fn discrete_laplacian_symbol(grid: &Grid1D, k: usize) -> f64 {
    laplacian_symbol(grid.spacing(), k)
}
