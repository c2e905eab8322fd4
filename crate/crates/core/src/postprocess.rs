//! The per-step postprocess on one interval: shift, filter the odd
//! extension, shift back.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::filter::{FilterSpec, SpectralFilter};
use crate::shift::{self, ShiftCoeffs};

/// Which low-frequency shift precedes the filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftOrder {
    /// Subtract `α₁ + α₂ cos x`; the extension is `C¹`.
    First,
    /// Subtract four cosine modes matching values and curvature; the
    /// extension is `C³`.
    Third,
}

impl ShiftOrder {
    pub fn order(self) -> u8 {
        match self {
            ShiftOrder::First => 1,
            ShiftOrder::Third => 3,
        }
    }

    pub fn from_order(order: u8) -> Option<Self> {
        match order {
            1 => Some(ShiftOrder::First),
            3 => Some(ShiftOrder::Third),
            _ => None,
        }
    }
}

/// Endpoint second derivatives, per component, in the coordinates of the
/// interval being filtered.
#[derive(Debug, Clone, Copy)]
pub struct EndCurvature<'a> {
    pub left: &'a [f64],
    pub right: &'a [f64],
}

/// Filter planned for one interval plus the shift order.
#[derive(Debug, Clone)]
pub struct Postprocessor1D {
    filter: SpectralFilter,
    order: ShiftOrder,
}

impl Postprocessor1D {
    pub fn new(n_intervals: usize, spec: FilterSpec, order: ShiftOrder) -> Self {
        Self {
            filter: SpectralFilter::new(n_intervals, spec),
            order,
        }
    }

    pub fn order(&self) -> ShiftOrder {
        self.order
    }

    pub fn filter(&self) -> &SpectralFilter {
        &self.filter
    }

    pub fn set_kappa(&mut self, kappa: f64) {
        self.filter.set_kappa(kappa);
    }

    pub fn apply(&self, u: &Field, curvature: Option<EndCurvature<'_>>) -> Result<Field> {
        Ok(self.apply_with_energy(u, curvature, 0..0)?.0)
    }

    /// Runs the pipeline and also returns the post-filter energy in the
    /// wavenumber `band`, summed over components.
    pub fn apply_with_energy(
        &self,
        u: &Field,
        curvature: Option<EndCurvature<'_>>,
        band: Range<usize>,
    ) -> Result<(Field, f64)> {
        if u.n_nodes() != self.filter.n_intervals() + 1 {
            return Err(Error::DimensionMismatch(format!(
                "postprocessor planned for {} intervals, field has {} nodes",
                self.filter.n_intervals(),
                u.n_nodes()
            )));
        }
        let (mut v, coeffs) = match (self.order, curvature) {
            (ShiftOrder::First, _) => {
                let (v, c) = shift::shift1(u);
                (v, ShiftCoeffs::First(c))
            }
            (ShiftOrder::Third, Some(k)) => {
                let (v, c) = shift::shift3(u, k.left, k.right);
                (v, ShiftCoeffs::Third(c))
            }
            (ShiftOrder::Third, None) => {
                return Err(Error::InvalidFilter(
                    "third-order shift needs endpoint curvature".into(),
                ))
            }
        };
        let mut energy = 0.0;
        for c in 0..u.components() {
            let mut comp = v.component(c);
            energy += self.filter.apply_in_place(&mut comp, band.clone());
            v.set_component(c, &comp);
        }
        Ok((shift::unshift(&v, &coeffs), energy))
    }
}

/// One-off postprocess of `u` on its own interval.
pub fn postprocess_1d(
    u: &Field,
    order: ShiftOrder,
    curvature: Option<EndCurvature<'_>>,
    spec: &FilterSpec,
) -> Result<Field> {
    spec.validate()?;
    Postprocessor1D::new(u.n_nodes() - 1, *spec, order).apply(u, curvature)
}
