//! Low-frequency shifts that make a field odd-extendable.
//!
//! Subtracting a few cosine modes leaves a remainder `v` that vanishes at
//! `0` and `π` (first order), and whose second derivative vanishes there as
//! well (third order). The odd reflection `v(2π − x) = −v(x)` of such a
//! remainder is a `2π`-periodic sine series that is `C¹` (resp. `C³`), so
//! filtering it does not trigger Gibbs oscillations at the boundary.
//!
//! Positions are taken as `x_j = π j / N` with `N = n_nodes − 1`, so the
//! same routines serve subdomains mapped onto `[0, π]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Field, Field2D};
use crate::filter::ENDPOINT_TOLERANCE;
use crate::reaction::ReactionSystem;

/// Corner mismatch tolerated by the 2D shift.
pub const CORNER_TOLERANCE: f64 = 1e-10;

/// Amplitudes of `1` and `cos x`, per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCoeffs1 {
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

/// Amplitudes of `cos(j x)`, `j = 0..=3`, per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCoeffs3 {
    pub alpha: Vec<[f64; 4]>,
    left: Vec<f64>,
    right: Vec<f64>,
}

/// Coefficients of either shift; [`unshift`] accepts both.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftCoeffs {
    First(ShiftCoeffs1),
    Third(ShiftCoeffs3),
}

impl ShiftCoeffs {
    /// Value of the subtracted trend for component `c` at position `x`.
    pub fn trend(&self, c: usize, x: f64) -> f64 {
        match self {
            ShiftCoeffs::First(s) => s.alpha1[c] + s.alpha2[c] * x.cos(),
            ShiftCoeffs::Third(s) => {
                let a = &s.alpha[c];
                a[0] + a[1] * x.cos() + a[2] * (2.0 * x).cos() + a[3] * (3.0 * x).cos()
            }
        }
    }

    fn endpoints(&self) -> (&[f64], &[f64]) {
        match self {
            ShiftCoeffs::First(s) => (&s.left, &s.right),
            ShiftCoeffs::Third(s) => (&s.left, &s.right),
        }
    }
}

fn position(j: usize, n: usize) -> f64 {
    PI * j as f64 / n as f64
}

fn subtract_trend(u: &Field, coeffs: &ShiftCoeffs) -> Field {
    let m = u.components();
    let n = u.n_nodes() - 1;
    let mut v = u.clone();
    for j in 1..n {
        let x = position(j, n);
        for c in 0..m {
            v.set(j, c, u.get(j, c) - coeffs.trend(c, x));
        }
    }
    v.node_mut(0).fill(0.0);
    v.node_mut(n).fill(0.0);
    v
}

/// First-order shift `v = u − α₁ − α₂ cos x` with
/// `α₁ = (u₀ + u_π)/2`, `α₂ = (u₀ − u_π)/2`, so that `v(0) = v(π) = 0`.
pub fn shift1(u: &Field) -> (Field, ShiftCoeffs1) {
    let n = u.n_nodes() - 1;
    let left = u.node(0).to_vec();
    let right = u.node(n).to_vec();
    let alpha1 = left.iter().zip(&right).map(|(a, b)| 0.5 * (a + b)).collect();
    let alpha2 = left.iter().zip(&right).map(|(a, b)| 0.5 * (a - b)).collect();
    let coeffs = ShiftCoeffs1 {
        alpha1,
        alpha2,
        left,
        right,
    };
    let wrapped = ShiftCoeffs::First(coeffs);
    let v = subtract_trend(u, &wrapped);
    let ShiftCoeffs::First(coeffs) = wrapped else {
        unreachable!()
    };
    (v, coeffs)
}

/// Solves for the four cosine amplitudes matching the endpoint values and
/// second derivatives:
///
/// ```text
///  α₁ + α₂ + α₃ + α₄  = u(0)
///  α₁ − α₂ + α₃ − α₄  = u(π)
///     − α₂ − 4α₃ − 9α₄ = u_xx(0)
///       α₂ − 4α₃ + 9α₄ = u_xx(π)
/// ```
pub fn shift3_coefficients(u0: f64, upi: f64, uxx0: f64, uxxpi: f64) -> [f64; 4] {
    let s = u0 + upi;
    let d = u0 - upi;
    let p = uxx0 + uxxpi;
    let q = uxx0 - uxxpi;
    [s / 2.0 + p / 8.0, (9.0 * d + q) / 16.0, -p / 8.0, -(q + d) / 16.0]
}

/// Third-order shift `v = u − Σ_{j=0}^{3} α_j cos(j x)` given the second
/// derivative of `u` at both ends (in the coordinates of `[0, π]`).
pub fn shift3(u: &Field, uxx_left: &[f64], uxx_right: &[f64]) -> (Field, ShiftCoeffs3) {
    let n = u.n_nodes() - 1;
    let left = u.node(0).to_vec();
    let right = u.node(n).to_vec();
    let alpha = (0..u.components())
        .map(|c| shift3_coefficients(left[c], right[c], uxx_left[c], uxx_right[c]))
        .collect();
    let wrapped = ShiftCoeffs::Third(ShiftCoeffs3 { alpha, left, right });
    let v = subtract_trend(u, &wrapped);
    let ShiftCoeffs::Third(coeffs) = wrapped else {
        unreachable!()
    };
    (v, coeffs)
}

/// Estimates `u_xx` at one node from the PDE itself: the discrete time
/// derivative minus the reaction,
/// `(3u⁺ − 4u + u⁻)/(2Δt) − f(u⁺)`. Without `prev` (first step) the
/// one-step difference `(u⁺ − u)/Δt` is used.
#[allow(clippy::too_many_arguments)]
pub fn curvature_estimate(
    reaction: &dyn ReactionSystem,
    pos: &[f64],
    t_next: f64,
    dt: f64,
    next: &[f64],
    curr: &[f64],
    prev: Option<&[f64]>,
    out: &mut [f64],
) {
    reaction.eval(pos, t_next, next, out);
    for c in 0..out.len() {
        let dudt = match prev {
            Some(p) => (3.0 * next[c] - 4.0 * curr[c] + p[c]) / (2.0 * dt),
            None => (next[c] - curr[c]) / dt,
        };
        out[c] = dudt - out[c];
    }
}

/// Third-order shift of `u^{n+1}` using the stored history to estimate the
/// endpoint curvature. `positions` are the physical endpoint coordinates
/// handed to the reaction term.
#[allow(clippy::too_many_arguments)]
pub fn shift3_from_history(
    next: &Field,
    curr: &Field,
    prev: Option<&Field>,
    reaction: &dyn ReactionSystem,
    positions: (f64, f64),
    t_next: f64,
    dt: f64,
) -> (Field, ShiftCoeffs3) {
    let m = next.components();
    let n = next.n_nodes() - 1;
    let mut left = vec![0.0; m];
    let mut right = vec![0.0; m];
    curvature_estimate(
        reaction,
        &[positions.0],
        t_next,
        dt,
        next.node(0),
        curr.node(0),
        prev.map(|p| p.node(0)),
        &mut left,
    );
    curvature_estimate(
        reaction,
        &[positions.1],
        t_next,
        dt,
        next.node(n),
        curr.node(n),
        prev.map(|p| p.node(n)),
        &mut right,
    );
    shift3(next, &left, &right)
}

/// Odd `2π`-periodic extension of one component given on `N + 1` nodes:
/// `w_j = v_j` for `j = 0..=N` and `w_{2N−j} = −v_j`. Returns `2N` samples.
pub fn odd_extend(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.len() - 1;
    let (left, right) = (v[0], v[n]);
    if left.abs() > ENDPOINT_TOLERANCE || right.abs() > ENDPOINT_TOLERANCE {
        return Err(Error::UnshiftedInput { left, right });
    }
    let mut w = Vec::with_capacity(2 * n);
    w.extend_from_slice(v);
    w.extend(v[1..n].iter().rev().map(|x| -x));
    Ok(w)
}

/// Adds the trend back: `u = σ_N v + Σ α_j cos((j−1)x)`. Endpoint values
/// are restored exactly from the pre-shift field.
pub fn unshift(filtered: &Field, coeffs: &ShiftCoeffs) -> Field {
    let m = filtered.components();
    let n = filtered.n_nodes() - 1;
    let mut u = filtered.clone();
    for j in 1..n {
        let x = position(j, n);
        for c in 0..m {
            u.set(j, c, filtered.get(j, c) + coeffs.trend(c, x));
        }
    }
    let (left, right) = coeffs.endpoints();
    u.node_mut(0).copy_from_slice(left);
    u.node_mut(n).copy_from_slice(right);
    u
}

/// Boundary traces of a 2D field: `bottom = g₀(x)`, `top = g_π(x)`,
/// `left = h₀(y)`, `right = h_π(y)`, each node-major with `m` components.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTraces {
    pub nx: usize,
    pub ny: usize,
    pub m: usize,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl EdgeTraces {
    pub fn from_field(u: &Field2D) -> Self {
        let (nx, ny) = u.shape();
        let m = u.components();
        let row = |j: usize| (0..=nx).flat_map(|i| u.node(i, j).to_vec()).collect();
        let col = |i: usize| (0..=ny).flat_map(|j| u.node(i, j).to_vec()).collect();
        Self {
            nx,
            ny,
            m,
            bottom: row(0),
            top: row(ny),
            left: col(0),
            right: col(nx),
        }
    }

    /// Checks `g₀(0) = h₀(0)`, `g_π(0) = h₀(π)`, `g₀(π) = h_π(0)` and
    /// `g_π(π) = h_π(π)` per component.
    pub fn check_compatibility(&self, tol: f64) -> Result<()> {
        let (nx, ny, m) = (self.nx, self.ny, self.m);
        for c in 0..m {
            let pairs = [
                ("0,0", self.bottom[c], self.left[c]),
                ("0,pi", self.top[c], self.left[ny * m + c]),
                ("pi,0", self.bottom[nx * m + c], self.right[c]),
                ("pi,pi", self.top[nx * m + c], self.right[ny * m + c]),
            ];
            for (corner, a, b) in pairs {
                if (a - b).abs() > tol {
                    return Err(Error::IncompatibleCorners {
                        corner,
                        mismatch: (a - b).abs(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Writes the traces onto the edges of `u`; the x-edges are written
    /// last and therefore own the corners.
    pub fn impose_on(&self, u: &mut Field2D) {
        let (nx, ny, m) = (self.nx, self.ny, self.m);
        for i in 0..=nx {
            u.node_mut(i, 0).copy_from_slice(&self.bottom[i * m..(i + 1) * m]);
            u.node_mut(i, ny).copy_from_slice(&self.top[i * m..(i + 1) * m]);
        }
        for j in 0..=ny {
            u.node_mut(0, j).copy_from_slice(&self.left[j * m..(j + 1) * m]);
            u.node_mut(nx, j).copy_from_slice(&self.right[j * m..(j + 1) * m]);
        }
    }
}

/// Coefficient functions of the two-stage 2D shift, sampled on the grid
/// lines: `alpha*` indexed by `(j, c)` along y, `beta*` by `(i, c)` along x.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCoeffs2D {
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    edges: EdgeTraces,
}

/// Two-stage shift. First `v = u − α₁(y) − α₂(y) cos x` with `α` built from
/// the x-boundary traces `h₀, h_π`, then `w = v − β₁(x) − β₂(x) cos y` with
/// `β` built from the traces of `v` on `y = 0, π`. The result vanishes on
/// all four edges.
pub fn shift2d(u: &Field2D, bc: &EdgeTraces) -> Result<(Field2D, ShiftCoeffs2D)> {
    bc.check_compatibility(CORNER_TOLERANCE)?;
    let (nx, ny) = u.shape();
    let m = u.components();
    if bc.nx != nx || bc.ny != ny || bc.m != m {
        return Err(Error::DimensionMismatch("boundary traces do not match the field".into()));
    }
    let mut alpha1 = vec![0.0; (ny + 1) * m];
    let mut alpha2 = vec![0.0; (ny + 1) * m];
    for k in 0..(ny + 1) * m {
        alpha1[k] = 0.5 * (bc.left[k] + bc.right[k]);
        alpha2[k] = 0.5 * (bc.left[k] - bc.right[k]);
    }
    let cos_x: Vec<f64> = (0..=nx).map(|i| position(i, nx).cos()).collect();
    let cos_y: Vec<f64> = (0..=ny).map(|j| position(j, ny).cos()).collect();

    let mut with_edges = u.clone();
    bc.impose_on(&mut with_edges);
    let mut v = with_edges.clone();
    for j in 0..=ny {
        for (i, cx) in cos_x.iter().enumerate() {
            for c in 0..m {
                let a = alpha1[j * m + c] + alpha2[j * m + c] * cx;
                v.set(i, j, c, with_edges.get(i, j, c) - a);
            }
        }
    }

    let mut beta1 = vec![0.0; (nx + 1) * m];
    let mut beta2 = vec![0.0; (nx + 1) * m];
    for i in 0..=nx {
        for c in 0..m {
            let (b, t) = (v.get(i, 0, c), v.get(i, ny, c));
            beta1[i * m + c] = 0.5 * (b + t);
            beta2[i * m + c] = 0.5 * (b - t);
        }
    }

    let mut w = v;
    for (j, cy) in cos_y.iter().enumerate() {
        for i in 0..=nx {
            for c in 0..m {
                let b = beta1[i * m + c] + beta2[i * m + c] * cy;
                let value = if i == 0 || j == 0 || i == nx || j == ny {
                    0.0
                } else {
                    w.get(i, j, c) - b
                };
                w.set(i, j, c, value);
            }
        }
    }
    Ok((
        w,
        ShiftCoeffs2D {
            alpha1,
            alpha2,
            beta1,
            beta2,
            edges: bc.clone(),
        },
    ))
}

/// Reconstruction `u = σ_N w + α₁(y) + α₂(y) cos x + β₁(x) + β₂(x) cos y`,
/// with the edges restored exactly from the traces used by the shift.
pub fn unshift2d(filtered: &Field2D, coeffs: &ShiftCoeffs2D) -> Field2D {
    let (nx, ny) = filtered.shape();
    let m = filtered.components();
    let mut u = filtered.clone();
    for j in 1..ny {
        let cy = position(j, ny).cos();
        for i in 1..nx {
            let cx = position(i, nx).cos();
            for c in 0..m {
                let trend = coeffs.alpha1[j * m + c]
                    + coeffs.alpha2[j * m + c] * cx
                    + coeffs.beta1[i * m + c]
                    + coeffs.beta2[i * m + c] * cy;
                u.set(i, j, c, filtered.get(i, j, c) + trend);
            }
        }
    }
    coeffs.edges.impose_on(&mut u);
    u
}
