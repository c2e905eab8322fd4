//! Multi-component nodal fields.
//!
//! Values are stored node-major: the `m` species of one node are
//! contiguous, which is the layout the pointwise reaction solve walks.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, Grid2D};

/// Default sup-norm above which a run is declared blown up.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e8;

/// `m`-component values on the nodes of a 1D grid (or of a subdomain).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    m: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(n_nodes: usize, m: usize) -> Self {
        assert!(m >= 1, "a field needs at least one component");
        Self {
            m,
            values: vec![0.0; n_nodes * m],
        }
    }

    /// Wraps node-major values.
    pub fn from_values(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 || !values.len().is_multiple_of(m) {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not split into {m} components",
                values.len()
            )));
        }
        Ok(Self { m, values })
    }

    /// Samples `init(x, out)` at every grid node.
    pub fn from_fn(grid: &Grid1D, m: usize, mut init: impl FnMut(f64, &mut [f64])) -> Self {
        let mut field = Self::zeros(grid.n_nodes(), m);
        for j in 0..grid.n_nodes() {
            init(grid.node(j), field.node_mut(j));
        }
        field
    }

    /// Single-component field from a scalar function.
    pub fn from_scalar_fn(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, 1, |x, out| out[0] = f(x))
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn node(&self, j: usize) -> &[f64] {
        &self.values[j * self.m..(j + 1) * self.m]
    }

    pub fn node_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.m..(j + 1) * self.m]
    }

    pub fn get(&self, j: usize, c: usize) -> f64 {
        self.values[j * self.m + c]
    }

    pub fn set(&mut self, j: usize, c: usize, value: f64) {
        self.values[j * self.m + c] = value;
    }

    /// Copies component `c` into a contiguous vector.
    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().skip(c).step_by(self.m).copied().collect()
    }

    pub fn set_component(&mut self, c: usize, data: &[f64]) {
        assert_eq!(data.len(), self.n_nodes());
        for (j, &v) in data.iter().enumerate() {
            self.values[j * self.m + c] = v;
        }
    }

    /// Restriction to the node range `lo..=hi`.
    pub fn slice_nodes(&self, lo: usize, hi: usize) -> Field {
        Field {
            m: self.m,
            values: self.values[lo * self.m..(hi + 1) * self.m].to_vec(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_shape(&self, other: &Field) -> bool {
        self.m == other.m && self.values.len() == other.values.len()
    }

    /// True once the field holds a non-finite value or exceeds `threshold`
    /// in sup norm.
    pub fn is_blown_up(&self, threshold: f64) -> bool {
        self.values.iter().any(|v| !v.is_finite() || v.abs() > threshold)
    }
}

/// `m`-component values on a [`Grid2D`]; node `(i, j)` lives at linear
/// index `j (N_x + 1) + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    nx: usize,
    ny: usize,
    m: usize,
    values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: &Grid2D, m: usize) -> Self {
        assert!(m >= 1, "a field needs at least one component");
        Self {
            nx: grid.x.n_intervals(),
            ny: grid.y.n_intervals(),
            m,
            values: vec![0.0; grid.n_nodes() * m],
        }
    }

    pub fn from_fn(grid: &Grid2D, m: usize, mut init: impl FnMut(f64, f64, &mut [f64])) -> Self {
        let mut field = Self::zeros(grid, m);
        for j in 0..=field.ny {
            for i in 0..=field.nx {
                init(grid.x.node(i), grid.y.node(j), field.node_mut(i, j));
            }
        }
        field
    }

    pub fn components(&self) -> usize {
        self.m
    }

    /// Interval counts `(N_x, N_y)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        (j * (self.nx + 1) + i) * self.m
    }

    pub fn node(&self, i: usize, j: usize) -> &[f64] {
        let o = self.offset(i, j);
        &self.values[o..o + self.m]
    }

    pub fn node_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let o = self.offset(i, j);
        &mut self.values[o..o + self.m]
    }

    pub fn get(&self, i: usize, j: usize, c: usize) -> f64 {
        self.values[self.offset(i, j) + c]
    }

    pub fn set(&mut self, i: usize, j: usize, c: usize, value: f64) {
        let o = self.offset(i, j);
        self.values[o + c] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn is_blown_up(&self, threshold: f64) -> bool {
        self.values.iter().any(|v| !v.is_finite() || v.abs() > threshold)
    }

    pub fn same_shape(&self, other: &Field2D) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.m == other.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_major_layout() {
        let g = Grid1D::new(4).unwrap();
        let f = Field::from_fn(&g, 2, |x, out| {
            out[0] = x;
            out[1] = -x;
        });
        assert_eq!(f.n_nodes(), 5);
        assert_eq!(f.node(2), &[g.node(2), -g.node(2)]);
        assert_eq!(f.component(1)[4], -g.node(4));
        assert_eq!(f.values()[3], -g.node(1));
    }

    #[test]
    fn blow_up_detection() {
        let mut f = Field::zeros(5, 1);
        assert!(!f.is_blown_up(DEFAULT_BLOWUP_THRESHOLD));
        f.set(2, 0, 2e8);
        assert!(f.is_blown_up(DEFAULT_BLOWUP_THRESHOLD));
        f.set(2, 0, f64::NAN);
        assert!(f.is_blown_up(f64::INFINITY));
        assert!(!f.is_finite());
    }

    #[test]
    fn rejects_ragged_values() {
        assert!(Field::from_values(2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn field2d_indexing() {
        let g = Grid2D::new(4, 6).unwrap();
        let f = Field2D::from_fn(&g, 1, |x, y, out| out[0] = x + 10.0 * y);
        assert_eq!(f.shape(), (4, 6));
        assert_eq!(f.get(3, 5, 0), g.x.node(3) + 10.0 * g.y.node(5));
        assert_eq!(f.values()[g.index(3, 5)], f.get(3, 5, 0));
    }
}
