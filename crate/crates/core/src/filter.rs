//! Order-8 spectral filter with stretching.
//!
//! A filter of order `p` is an even `σ` with `σ(0) = 1`, vanishing
//! derivatives of orders `1..p−1` at the origin, support in `[−1, 1]` and
//! `C^{p−1}` smoothness. The sine coefficient of wavenumber `k` on a grid
//! of `N` intervals is multiplied by `σ(κ k / N)`; the stretching `κ` moves
//! the cutoff down to `N / κ`.

use std::f64::consts::{PI, SQRT_2};
use std::ops::Range;

use crate::dst::SineTransform;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::shift;

/// Endpoint magnitude above which a field counts as unshifted.
pub const ENDPOINT_TOLERANCE: f64 = 1e-12;

/// `σ(ξ) = (35 − 84y + 70y² − 20y³) y⁴` with `y = (1 + cos πξ)/2`, zero for
/// `|ξ| ≥ 1`.
pub fn sigma8(xi: f64) -> f64 {
    let a = xi.abs();
    if a >= 1.0 {
        return 0.0;
    }
    if a <= 0.5 {
        // keeps the weight at or below 1 after rounding
        return 1.0 - sigma8_complement(a);
    }
    let y = 0.5 * (1.0 + (PI * a).cos());
    smoothstep7(y)
}

/// `1 − σ(ξ)`, evaluated without cancellation near `ξ = 0`.
///
/// The polynomial satisfies `P(y) + P(1 − y) = 1`, and `1 − y = sin²(πξ/2)`,
/// so the complement is the same polynomial at `sin²(πξ/2)`.
pub fn sigma8_complement(xi: f64) -> f64 {
    let a = xi.abs();
    if a >= 1.0 {
        return 1.0;
    }
    let s = (0.5 * PI * a).sin();
    smoothstep7(s * s)
}

fn smoothstep7(y: f64) -> f64 {
    let y2 = y * y;
    y2 * y2 * (35.0 + y * (-84.0 + y * (70.0 - 20.0 * y)))
}

/// Filter shape and stretching.
#[derive(Debug, Clone, Copy)]
pub struct FilterSpec {
    pub order: u32,
    pub sigma: fn(f64) -> f64,
    pub kappa: f64,
}

impl FilterSpec {
    /// The built-in order-8 filter with stretching `kappa`.
    pub fn eighth_order(kappa: f64) -> Self {
        Self {
            order: 8,
            sigma: sigma8,
            kappa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidFilter(format!(
                "stretching factor must be positive and finite, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// Multiplier `σ(κ k / N)` for wavenumber `k` on `n` intervals.
    pub fn weight(&self, k: usize, n: usize) -> f64 {
        (self.sigma)(self.kappa * k as f64 / n as f64)
    }

    /// Effective cutoff wavenumber `N / κ`.
    pub fn cutoff(&self, n: usize) -> f64 {
        n as f64 / self.kappa
    }

    pub fn with_kappa(self, kappa: f64) -> Self {
        Self { kappa, ..self }
    }
}

/// Critical stretching at which the cutoff `N / κ` sits on the stability
/// boundary of the explicit diffusion term.
///
/// The marginal wavenumber satisfies `cos(h k) = 1 − 2h²/(3Δt)`, hence
/// `κ_c = π / arccos(1 − 2h²/(3Δt))`. Below `Δt = h²/3` no mode is unstable
/// and the result is 1.
pub fn kappa_critical(dt: f64, h: f64) -> f64 {
    if dt <= h * h / 3.0 {
        return 1.0;
    }
    PI / (1.0 - 2.0 * h * h / (3.0 * dt)).acos()
}

/// Per-axis critical stretching for the five-point Laplacian: the 1D rule
/// with `h²` replaced by `h²/2`, so that the worst diagonal mode `k = l` is
/// cut. Equal to 1 for `Δt ≤ h²/6`.
pub fn kappa_critical_2d(dt: f64, h: f64) -> f64 {
    if dt <= h * h / 6.0 {
        return 1.0;
    }
    kappa_critical(dt, h / SQRT_2)
}

/// Order-8 sine filter planned for a fixed number of intervals.
#[derive(Debug, Clone)]
pub struct SpectralFilter {
    transform: SineTransform,
    spec: FilterSpec,
    weights: Vec<f64>,
}

impl SpectralFilter {
    pub fn new(n_intervals: usize, spec: FilterSpec) -> Self {
        let weights = (1..n_intervals).map(|k| spec.weight(k, n_intervals)).collect();
        Self {
            transform: SineTransform::new(n_intervals),
            spec,
            weights,
        }
    }

    pub fn spec(&self) -> &FilterSpec {
        &self.spec
    }

    pub fn n_intervals(&self) -> usize {
        self.transform.n_intervals()
    }

    /// Retunes the stretching factor, keeping the planned transform.
    pub fn set_kappa(&mut self, kappa: f64) {
        self.spec.kappa = kappa;
        let n = self.n_intervals();
        for (i, w) in self.weights.iter_mut().enumerate() {
            *w = self.spec.weight(i + 1, n);
        }
    }

    /// Modes `k` with weight above the retention threshold.
    pub fn retained_modes(&self) -> usize {
        self.weights
            .iter()
            .filter(|&&w| w > crate::stability::RETENTION_THRESHOLD)
            .count()
    }

    /// The upper quarter of the retained wavenumbers.
    pub fn top_band(&self) -> Range<usize> {
        let r = self.retained_modes();
        let lo = (3 * r) / 4 + 1;
        lo..r + 1
    }

    /// Filters one component given on all `N + 1` nodes in place. The
    /// endpoints must already vanish; they are left at exactly zero.
    /// Returns the post-filter energy `Σ S_k²` over `band`.
    pub fn apply_in_place(&self, values: &mut [f64], band: Range<usize>) -> f64 {
        let n = self.n_intervals();
        debug_assert_eq!(values.len(), n + 1);
        let mut coeffs = vec![0.0; n - 1];
        self.transform.forward(&values[1..n], &mut coeffs);
        let mut energy = 0.0;
        for (i, (c, w)) in coeffs.iter_mut().zip(&self.weights).enumerate() {
            *c *= w;
            if band.contains(&(i + 1)) {
                energy += *c * *c;
            }
        }
        self.transform.inverse(&coeffs, &mut values[1..n]);
        values[0] = 0.0;
        values[n] = 0.0;
        energy
    }

    /// Filters every component of a shifted field.
    pub fn apply(&self, v: &Field) -> Result<Field> {
        check_endpoints(v)?;
        let mut out = v.clone();
        for c in 0..v.components() {
            let mut comp = v.component(c);
            self.apply_in_place(&mut comp, 0..0);
            out.set_component(c, &comp);
        }
        Ok(out)
    }
}

fn check_endpoints(v: &Field) -> Result<()> {
    let last = v.n_nodes() - 1;
    for c in 0..v.components() {
        let (left, right) = (v.get(0, c), v.get(last, c));
        if left.abs() > ENDPOINT_TOLERANCE || right.abs() > ENDPOINT_TOLERANCE {
            return Err(Error::UnshiftedInput { left, right });
        }
    }
    Ok(())
}

/// Replaces the sine coefficients of `v` by `σ(κ k/N) v̂_k`. The field must
/// vanish at both ends, as produced by a shift.
pub fn apply_filter(v: &Field, spec: &FilterSpec) -> Result<Field> {
    spec.validate()?;
    SpectralFilter::new(v.n_nodes() - 1, *spec).apply(v)
}

/// Removes high wavenumbers from a 1D boundary trace: first-order shift,
/// filter, inverse shift. The endpoint values are kept exactly.
pub fn filter_boundary_trace(samples: &[f64], spec: &FilterSpec) -> Vec<f64> {
    let filter = SpectralFilter::new(samples.len() - 1, *spec);
    filter_trace_with(&filter, samples)
}

pub(crate) fn filter_trace_with(filter: &SpectralFilter, samples: &[f64]) -> Vec<f64> {
    let field = Field::from_values(1, samples.to_vec()).expect("one component");
    let (mut v, coeffs) = shift::shift1(&field);
    filter.apply_in_place(v.values_mut(), 0..0);
    shift::unshift(&v, &shift::ShiftCoeffs::First(coeffs)).into_values()
}

/// Thresholds for the stretching monitor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaAdaptSettings {
    /// Step-to-step energy ratio counted as growth.
    pub growth_factor: f64,
    /// Consecutive growing steps that trigger an increase.
    pub consecutive: usize,
    /// Multiplier applied to `κ` on a trigger.
    pub increase: f64,
}

impl Default for KappaAdaptSettings {
    fn default() -> Self {
        Self {
            growth_factor: 1.05,
            consecutive: 2,
            increase: 1.1,
        }
    }
}

/// Watches the energy left in the top band of retained modes and asks for
/// more stretching when it keeps growing.
#[derive(Debug, Clone, Default)]
pub struct KappaMonitor {
    settings: KappaAdaptSettings,
    last: Option<f64>,
    streak: usize,
}

impl KappaMonitor {
    pub fn new(settings: KappaAdaptSettings) -> Self {
        Self {
            settings,
            last: None,
            streak: 0,
        }
    }

    pub fn settings(&self) -> &KappaAdaptSettings {
        &self.settings
    }

    /// Feeds the post-filter top-band energy of one step. Returns `true`
    /// when `κ` should be multiplied by `settings.increase`; the history is
    /// then cleared since the band moves.
    pub fn observe(&mut self, energy: f64) -> bool {
        let growing = matches!(self.last, Some(prev) if prev > 0.0 && energy > self.settings.growth_factor * prev);
        self.streak = if growing { self.streak + 1 } else { 0 };
        self.last = Some(energy);
        if self.streak >= self.settings.consecutive {
            self.streak = 0;
            self.last = None;
            return true;
        }
        false
    }
}
