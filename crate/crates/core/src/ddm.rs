//! Overlapping strip decomposition of the postprocess.
//!
//! The time step stays global; only the shift/filter/unshift pipeline runs
//! per subdomain, each subdomain treating its end values as local boundary
//! data. Overlapping results are merged with a linear partition of unity.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::filter::FilterSpec;
use crate::grid::Grid1D;
use crate::postprocess::{EndCurvature, Postprocessor1D, ShiftOrder};

/// Every subdomain keeps at least this many interior nodes.
pub const MIN_SUBDOMAIN_INTERIOR: usize = 8;

/// Node ranges `[lo_i, hi_i]` of `N_d` overlapping strips covering `0..=N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdomainLayout {
    n_intervals: usize,
    overlap: usize,
    ranges: Vec<(usize, usize)>,
}

impl SubdomainLayout {
    pub fn n_subdomains(&self) -> usize {
        self.ranges.len()
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    /// Overlap width in grid intervals (0 for a single subdomain).
    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn ranges(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    /// Largest overlap the adaptive rule may reach: `N / (2 N_d)`.
    pub fn overlap_cap(&self) -> usize {
        self.n_intervals / (2 * self.n_subdomains())
    }

    /// Partition-of-unity weight of subdomain `i` at each of its nodes:
    /// linear ramps across the overlaps, 1 elsewhere.
    pub fn weights(&self, i: usize) -> Vec<f64> {
        let (lo, hi) = self.ranges[i];
        (lo..=hi)
            .map(|g| {
                let mut w: f64 = 1.0;
                if i > 0 {
                    let left_hi = self.ranges[i - 1].1;
                    if g <= left_hi {
                        w = w.min((g - lo) as f64 / (left_hi - lo) as f64);
                    }
                }
                if i + 1 < self.ranges.len() {
                    let right_lo = self.ranges[i + 1].0;
                    if g >= right_lo {
                        w = w.min((hi - g) as f64 / (hi - right_lo) as f64);
                    }
                }
                w
            })
            .collect()
    }

    /// Nodes lying in some overlap region.
    pub fn overlap_nodes(&self) -> Vec<usize> {
        self.ranges
            .windows(2)
            .flat_map(|pair| pair[1].0..=pair[0].1)
            .collect()
    }

    /// Artificial interface positions: subdomain ends that are not global
    /// boundaries.
    pub fn interfaces(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            if i > 0 {
                out.push(lo);
            }
            if i + 1 < self.ranges.len() {
                out.push(hi);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Splits `0..=N` at `round(i N / N_d)` and widens every cut by
/// `overlap / 2` intervals on each side.
pub fn make_layout(grid: &Grid1D, n_subdomains: usize, overlap: usize) -> Result<SubdomainLayout> {
    let n = grid.n_intervals();
    if n_subdomains == 0 {
        return Err(Error::InfeasibleLayout("need at least one subdomain".into()));
    }
    if n_subdomains == 1 {
        return Ok(SubdomainLayout {
            n_intervals: n,
            overlap: 0,
            ranges: vec![(0, n)],
        });
    }
    if overlap < 2 || !overlap.is_multiple_of(2) {
        return Err(Error::InfeasibleLayout(format!(
            "overlap must be even and at least 2, got {overlap}"
        )));
    }
    let cuts: Vec<usize> = (0..=n_subdomains)
        .map(|i| (i * n + n_subdomains / 2) / n_subdomains)
        .collect();
    let half = overlap / 2;
    let mut ranges = Vec::with_capacity(n_subdomains);
    for i in 0..n_subdomains {
        let core = cuts[i + 1] - cuts[i];
        if core < overlap {
            return Err(Error::InfeasibleLayout(format!(
                "overlap {overlap} exceeds the width {core} of subdomain {i} (N = {n}, N_d = {n_subdomains})"
            )));
        }
        let lo = if i == 0 { 0 } else { cuts[i] - half };
        let hi = if i + 1 == n_subdomains { n } else { cuts[i + 1] + half };
        if hi - lo - 1 < MIN_SUBDOMAIN_INTERIOR {
            return Err(Error::InfeasibleLayout(format!(
                "subdomain {i} has {} interior nodes, need {MIN_SUBDOMAIN_INTERIOR}",
                hi - lo - 1
            )));
        }
        ranges.push((lo, hi));
    }
    Ok(SubdomainLayout {
        n_intervals: n,
        overlap,
        ranges,
    })
}

/// Planned per-subdomain postprocessors plus blend weights.
#[derive(Debug, Clone)]
pub struct DdPostprocessor {
    layout: SubdomainLayout,
    locals: Vec<Postprocessor1D>,
    weights: Vec<Vec<f64>>,
}

impl DdPostprocessor {
    /// `kappa` is the stretching factor; each subdomain applies it to its
    /// own mode count, `σ(κ k / N_loc)`.
    pub fn new(layout: SubdomainLayout, kappa: f64, order: ShiftOrder) -> Self {
        let locals = layout
            .ranges()
            .iter()
            .map(|&(lo, hi)| Postprocessor1D::new(hi - lo, FilterSpec::eighth_order(kappa), order))
            .collect();
        let weights = (0..layout.n_subdomains()).map(|i| layout.weights(i)).collect();
        Self {
            layout,
            locals,
            weights,
        }
    }

    pub fn layout(&self) -> &SubdomainLayout {
        &self.layout
    }

    pub fn set_kappa(&mut self, kappa: f64) {
        for p in &mut self.locals {
            p.set_kappa(kappa);
        }
    }

    /// Postprocesses `u`. `curvature` holds physical `u_xx` estimates at all
    /// nodes and is required for the third-order shift.
    pub fn apply(&self, u: &Field, grid: &Grid1D, curvature: Option<&Field>) -> Result<Field> {
        if u.n_nodes() != self.layout.n_intervals + 1 {
            return Err(Error::DimensionMismatch("field does not match the layout".into()));
        }
        let h = grid.spacing();
        let locals: Vec<Field> = self
            .layout
            .ranges()
            .par_iter()
            .zip(&self.locals)
            .map(|(&(lo, hi), proc)| {
                let piece = u.slice_nodes(lo, hi);
                match curvature {
                    Some(k) => {
                        // d²/dx'² = (L/π)² d²/dx² on the mapped interval
                        let scale = ((hi - lo) as f64 * h / std::f64::consts::PI).powi(2);
                        let left: Vec<f64> = k.node(lo).iter().map(|v| v * scale).collect();
                        let right: Vec<f64> = k.node(hi).iter().map(|v| v * scale).collect();
                        proc.apply(
                            &piece,
                            Some(EndCurvature {
                                left: &left,
                                right: &right,
                            }),
                        )
                    }
                    None => proc.apply(&piece, None),
                }
            })
            .collect::<Result<_>>()?;

        let m = u.components();
        let mut out = Field::zeros(u.n_nodes(), m);
        for ((&(lo, _), local), weights) in self.layout.ranges().iter().zip(&locals).zip(&self.weights) {
            for (j, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let dst = out.node_mut(lo + j);
                for (d, s) in dst.iter_mut().zip(local.node(j)) {
                    *d += w * s;
                }
            }
        }
        Ok(out)
    }
}

/// One-off decomposed postprocess.
pub fn postprocess_dd(
    u: &Field,
    grid: &Grid1D,
    layout: &SubdomainLayout,
    order: ShiftOrder,
    curvature: Option<&Field>,
    kappa: f64,
) -> Result<Field> {
    DdPostprocessor::new(layout.clone(), kappa, order).apply(u, grid, curvature)
}

/// High-frequency content near the interfaces: squared second differences
/// summed over the overlap nodes.
pub fn interface_energy(u: &Field, layout: &SubdomainLayout) -> f64 {
    let m = u.components();
    let last = u.n_nodes() - 1;
    layout
        .overlap_nodes()
        .into_iter()
        .filter(|&j| j > 0 && j < last)
        .map(|j| {
            (0..m)
                .map(|c| {
                    let d = u.get(j - 1, c) - 2.0 * u.get(j, c) + u.get(j + 1, c);
                    d * d
                })
                .sum::<f64>()
        })
        .sum()
}

/// Outcome of one adaptation decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapAdaptation {
    Unchanged,
    Increased { from: usize, to: usize },
    /// Growth persisted but the overlap cannot grow any further.
    Saturated,
}

/// Thresholds of the overlap rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapAdaptSettings {
    pub growth_factor: f64,
    pub consecutive: usize,
    pub increment: usize,
}

impl Default for OverlapAdaptSettings {
    fn default() -> Self {
        Self {
            growth_factor: 1.05,
            consecutive: 2,
            increment: 2,
        }
    }
}

/// Widens the overlap by two intervals when the interface-energy growth
/// factor exceeded 1.05 on each of the last two steps. The overlap is never
/// reduced and never exceeds [`SubdomainLayout::overlap_cap`].
pub fn adapt_overlap(growth_history: &[f64], layout: &SubdomainLayout) -> (SubdomainLayout, OverlapAdaptation) {
    adapt_overlap_with(growth_history, layout, &OverlapAdaptSettings::default())
}

pub fn adapt_overlap_with(
    growth_history: &[f64],
    layout: &SubdomainLayout,
    settings: &OverlapAdaptSettings,
) -> (SubdomainLayout, OverlapAdaptation) {
    let k = settings.consecutive;
    let triggered = layout.n_subdomains() > 1
        && growth_history.len() >= k
        && growth_history[growth_history.len() - k..]
            .iter()
            .all(|&g| g > settings.growth_factor);
    if !triggered {
        return (layout.clone(), OverlapAdaptation::Unchanged);
    }
    let from = layout.overlap();
    let to = from + settings.increment;
    let widened = (to <= layout.overlap_cap())
        .then(|| {
            Grid1D::new(layout.n_intervals())
                .and_then(|g| make_layout(&g, layout.n_subdomains(), to))
                .ok()
        })
        .flatten();
    match widened {
        Some(next) => (next, OverlapAdaptation::Increased { from, to }),
        None => {
            log::warn!("overlap {from} is at its cap {}; growth persists", layout.overlap_cap());
            (layout.clone(), OverlapAdaptation::Saturated)
        }
    }
}

/// Tracks interface-energy growth across steps for [`adapt_overlap`].
#[derive(Debug, Clone, Default)]
pub struct OverlapMonitor {
    last_energy: Option<f64>,
    growth: Vec<f64>,
}

impl OverlapMonitor {
    /// Records the energy of the latest postprocessed field and returns the
    /// growth history so far.
    pub fn observe(&mut self, energy: f64) -> &[f64] {
        if let Some(prev) = self.last_energy {
            let g = if prev > 0.0 { energy / prev } else { 1.0 };
            self.growth.push(g);
        }
        self.last_energy = Some(energy);
        &self.growth
    }

    /// Forgets the history, e.g. after the layout changed.
    pub fn reset(&mut self) {
        self.last_energy = None;
        self.growth.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postprocess::Postprocessor1D;
    use std::f64::consts::PI;

    #[test]
    fn layout_examples() {
        let g = Grid1D::new(64).unwrap();
        assert_eq!(make_layout(&g, 1, 6).unwrap().ranges(), &[(0, 64)]);
        assert_eq!(make_layout(&g, 2, 8).unwrap().ranges(), &[(0, 36), (28, 64)]);
        let g16 = Grid1D::new(16).unwrap();
        assert!(make_layout(&g16, 4, 12).is_err());
        assert!(make_layout(&g, 2, 3).is_err());
        assert!(make_layout(&g, 2, 0).is_err());
        assert!(make_layout(&g, 0, 2).is_err());
    }

    #[test]
    fn layout_invariants() {
        for (n, nd, ov) in [(64, 2, 8), (128, 4, 4), (128, 4, 16), (100, 3, 6), (257, 5, 10)] {
            let g = Grid1D::new(n).unwrap();
            let l = make_layout(&g, nd, ov).unwrap();
            let r = l.ranges();
            assert_eq!(r[0].0, 0);
            assert_eq!(r[nd - 1].1, n);
            for pair in r.windows(2) {
                assert_eq!(pair[0].1 - pair[1].0, ov);
            }
            for &(lo, hi) in r {
                assert!(hi - lo > MIN_SUBDOMAIN_INTERIOR);
            }
        }
    }

    #[test]
    fn weights_form_partition_of_unity() {
        let g = Grid1D::new(128).unwrap();
        for (nd, ov) in [(2, 8), (4, 16), (4, 4), (3, 32)] {
            let l = make_layout(&g, nd, ov).unwrap();
            let mut total = vec![0.0; 129];
            for i in 0..nd {
                let (lo, _) = l.ranges()[i];
                for (j, w) in l.weights(i).into_iter().enumerate() {
                    assert!((0.0..=1.0).contains(&w));
                    total[lo + j] += w;
                }
            }
            assert!(total.iter().all(|t| (t - 1.0).abs() <= 1e-14), "{nd} {ov}");
        }
    }

    #[test]
    fn single_subdomain_matches_global_pipeline() {
        let g = Grid1D::new(64).unwrap();
        let u = Field::from_scalar_fn(&g, |x| (x / PI).powi(4) + (3.0 * x).cos() + 0.01 * (40.0 * x).sin());
        let l = make_layout(&g, 1, 4).unwrap();
        let dd = postprocess_dd(&u, &g, &l, ShiftOrder::First, None, 2.5).unwrap();
        let single = Postprocessor1D::new(64, FilterSpec::eighth_order(2.5), ShiftOrder::First)
            .apply(&u, None)
            .unwrap();
        for (a, b) in dd.values().iter().zip(single.values()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_and_cosine_fields() {
        let g = Grid1D::new(64).unwrap();
        let l = make_layout(&g, 4, 8).unwrap();
        let z = postprocess_dd(&Field::zeros(65, 2), &g, &l, ShiftOrder::First, None, 2.0).unwrap();
        assert_eq!(z.sup_norm(), 0.0);

        let u = Field::from_scalar_fn(&g, |x| x.cos());
        let l1 = make_layout(&g, 1, 2).unwrap();
        let out = postprocess_dd(&u, &g, &l1, ShiftOrder::First, None, 3.0).unwrap();
        for (a, b) in out.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn global_boundary_values_preserved() {
        let g = Grid1D::new(96).unwrap();
        let u = Field::from_scalar_fn(&g, |x| 2.0 + (x / PI).powi(4) + (5.0 * x).cos());
        let l = make_layout(&g, 3, 10).unwrap();
        let out = postprocess_dd(&u, &g, &l, ShiftOrder::First, None, 2.0).unwrap();
        assert_eq!(out.get(0, 0), u.get(0, 0));
        assert_eq!(out.get(96, 0), u.get(96, 0));
    }

    #[test]
    fn adaptation_rule() {
        let g = Grid1D::new(64).unwrap();
        let l = make_layout(&g, 2, 4).unwrap();
        let (same, what) = adapt_overlap(&[1.0, 1.0, 1.0], &l);
        assert_eq!(what, OverlapAdaptation::Unchanged);
        assert_eq!(same, l);
        let (wider, what) = adapt_overlap(&[1.0, 1.1, 1.1], &l);
        assert_eq!(what, OverlapAdaptation::Increased { from: 4, to: 6 });
        assert_eq!(wider.overlap(), 6);
        let (_, what) = adapt_overlap(&[1.1, 1.0], &l);
        assert_eq!(what, OverlapAdaptation::Unchanged);

        let capped = make_layout(&g, 2, 16).unwrap();
        assert_eq!(capped.overlap_cap(), 16);
        let (same, what) = adapt_overlap(&[1.2, 1.2], &capped);
        assert_eq!(what, OverlapAdaptation::Saturated);
        assert_eq!(same, capped);
    }

    #[test]
    fn monitor_records_growth() {
        let mut m = OverlapMonitor::default();
        assert!(m.observe(1.0).is_empty());
        assert_eq!(m.observe(2.0), &[2.0]);
        m.reset();
        assert!(m.observe(5.0).is_empty());
    }
}
