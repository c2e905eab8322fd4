//! Per-mode linear stability of the two-step scheme.
//!
//! For `f ≡ 0` a sine mode with symbol `Λ` evolves by
//! `3ẑ⁺ = (4 + 4a) ẑ − (1 + 2a) ẑ⁻`, `a = Δt Λ`. Filtering after each step
//! multiplies the new level by the filter weight `s`, so the recurrence
//! becomes `3z² − s(4 + 4a) z + s(1 + 2a) = 0`.

use rustfft::num_complex::Complex64;

use crate::filter::FilterSpec;
use crate::grid::{laplacian_symbol, Grid1D, Grid2D};

/// Roots of `3z² − s(4 + 4a) z + s(1 + 2a)` for `a = Δt Λ` and filter weight
/// `s`.
pub fn characteristic_roots(dt_lambda: f64, weight: f64) -> [Complex64; 2] {
    let b = weight * (4.0 + 4.0 * dt_lambda);
    let c = weight * (1.0 + 2.0 * dt_lambda);
    let disc = Complex64::new(b * b - 12.0 * c, 0.0).sqrt();
    [(b + disc) / 6.0, (b - disc) / 6.0]
}

/// Largest root modulus of the unfiltered recurrence.
pub fn amplification(dt_lambda: f64) -> f64 {
    let [z1, z2] = characteristic_roots(dt_lambda, 1.0);
    z1.norm().max(z2.norm())
}

/// Largest root modulus with filter weight `weight` applied every step.
pub fn filtered_amplification(dt_lambda: f64, weight: f64) -> f64 {
    let [z1, z2] = characteristic_roots(dt_lambda, weight);
    z1.norm().max(z2.norm())
}

/// Iterates the scalar recurrence for `steps` steps from `(ẑ⁰, ẑ¹)`.
pub fn mode_recurrence(dt_lambda: f64, z0: f64, z1: f64, steps: usize) -> Vec<f64> {
    let mut out = vec![z0, z1];
    for n in 1..steps {
        let next = ((4.0 + 4.0 * dt_lambda) * out[n] - (1.0 + 2.0 * dt_lambda) * out[n - 1]) / 3.0;
        out.push(next);
    }
    out
}

/// True when every mode `k = 1..N−1` has unfiltered amplification ≤ `1 + tol`.
pub fn unfiltered_stable(grid: &Grid1D, dt: f64, tol: f64) -> bool {
    (1..grid.n_intervals())
        .all(|k| amplification(dt * laplacian_symbol(grid.spacing(), k)) <= 1.0 + tol)
}

/// Outcome of the retained-mode root check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCertificate {
    /// Largest unfiltered root modulus over modes the filter keeps.
    pub max_retained_modulus: f64,
    /// Largest root modulus of the filtered recurrence over all modes.
    pub max_filtered_modulus: f64,
    /// Number of modes whose weight exceeds the retention threshold.
    pub retained: usize,
    /// Wavenumber attaining `max_retained_modulus`.
    pub worst_mode: usize,
}

impl ModeCertificate {
    pub fn certifies(&self, tol: f64) -> bool {
        self.max_retained_modulus <= 1.0 + tol && self.max_filtered_modulus <= 1.0 + tol
    }
}

/// Weight below which a mode counts as removed by the filter.
pub const RETENTION_THRESHOLD: f64 = 1e-12;

/// Root check over the sine modes `k = 1..N−1` of `grid` under `spec`.
pub fn certify_filtered_modes(grid: &Grid1D, dt: f64, spec: &FilterSpec) -> ModeCertificate {
    let n = grid.n_intervals();
    let mut cert = ModeCertificate {
        max_retained_modulus: 0.0,
        max_filtered_modulus: 0.0,
        retained: 0,
        worst_mode: 0,
    };
    for k in 1..n {
        let a = dt * laplacian_symbol(grid.spacing(), k);
        let w = spec.weight(k, n);
        cert.max_filtered_modulus = cert.max_filtered_modulus.max(filtered_amplification(a, w));
        if w > RETENTION_THRESHOLD {
            cert.retained += 1;
            let amp = amplification(a);
            if amp > cert.max_retained_modulus {
                cert.max_retained_modulus = amp;
                cert.worst_mode = k;
            }
        }
    }
    cert
}

/// Root check over the tensor modes `(k, l)` of a 2D grid with per-axis
/// filters.
pub fn certify_filtered_modes_2d(
    grid: &Grid2D,
    dt: f64,
    spec_x: &FilterSpec,
    spec_y: &FilterSpec,
) -> ModeCertificate {
    let (nx, ny) = (grid.x.n_intervals(), grid.y.n_intervals());
    let mut cert = ModeCertificate {
        max_retained_modulus: 0.0,
        max_filtered_modulus: 0.0,
        retained: 0,
        worst_mode: 0,
    };
    for l in 1..ny {
        let wy = spec_y.weight(l, ny);
        let ly = laplacian_symbol(grid.y.spacing(), l);
        for k in 1..nx {
            let w = spec_x.weight(k, nx) * wy;
            let a = dt * (laplacian_symbol(grid.x.spacing(), k) + ly);
            cert.max_filtered_modulus = cert.max_filtered_modulus.max(filtered_amplification(a, w));
            if w > RETENTION_THRESHOLD {
                cert.retained += 1;
                let amp = amplification(a);
                if amp > cert.max_retained_modulus {
                    cert.max_retained_modulus = amp;
                    cert.worst_mode = l * nx + k;
                }
            }
        }
    }
    cert
}
