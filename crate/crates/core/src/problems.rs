//! Bundled test problems.

use std::f64::consts::PI;

use crate::grid::{laplacian_symbol, Grid1D};
use crate::reaction::ReactionSystem;
use crate::solver2d::Problem2D;
use crate::stepper::BoundaryValues;

/// A 1D reaction-diffusion problem on `(0, π)` with Dirichlet data.
pub trait Problem1D: ReactionSystem {
    fn name(&self) -> &str;

    fn initial(&self, x: f64, out: &mut [f64]);

    fn boundary(&self, t: f64) -> BoundaryValues;

    /// Writes the exact solution when one is known.
    fn exact(&self, _x: f64, _t: f64, _out: &mut [f64]) -> bool {
        false
    }
}

/// `u*(x, t) = cos t · ((x/π)⁴ + cos 3x)` driven by the source
/// `s = ∂_t u* − ∂_xx u*`, fed through the reaction slot as `f(x, t, u) = s`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ManufacturedHeat;

impl ManufacturedHeat {
    fn profile(x: f64) -> f64 {
        (x / PI).powi(4) + (3.0 * x).cos()
    }

    fn profile_xx(x: f64) -> f64 {
        12.0 * x * x / PI.powi(4) - 9.0 * (3.0 * x).cos()
    }

    pub fn solution(&self, x: f64, t: f64) -> f64 {
        t.cos() * Self::profile(x)
    }

    pub fn solution_t(&self, x: f64, t: f64) -> f64 {
        -t.sin() * Self::profile(x)
    }

    pub fn solution_xx(&self, x: f64, t: f64) -> f64 {
        t.cos() * Self::profile_xx(x)
    }

    /// `s(x,t) = −sin t ((x/π)⁴ + cos 3x) − cos t (12x²/π⁴ − 9 cos 3x)`.
    pub fn source(&self, x: f64, t: f64) -> f64 {
        -t.sin() * Self::profile(x) - t.cos() * Self::profile_xx(x)
    }
}

/// Convenience constructor.
pub fn manufactured_heat_case() -> ManufacturedHeat {
    ManufacturedHeat
}

impl ReactionSystem for ManufacturedHeat {
    fn components(&self) -> usize {
        1
    }

    fn eval(&self, pos: &[f64], t: f64, _u: &[f64], out: &mut [f64]) {
        out[0] = self.source(pos[0], t);
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, _u: &[f64], jac: &mut [f64]) {
        jac[0] = 0.0;
    }
}

impl Problem1D for ManufacturedHeat {
    fn name(&self) -> &str {
        "heat1d"
    }

    fn initial(&self, x: f64, out: &mut [f64]) {
        out[0] = self.solution(x, 0.0);
    }

    fn boundary(&self, t: f64) -> BoundaryValues {
        BoundaryValues {
            left: vec![self.solution(0.0, t)],
            right: vec![self.solution(PI, t)],
        }
    }

    fn exact(&self, x: f64, t: f64, out: &mut [f64]) -> bool {
        out[0] = self.solution(x, t);
        true
    }
}

/// Sign convention of the predator equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredatorCoupling {
    /// `∂_t v = ∂_xx v − c u − d u v`.
    Printed,
    /// Lotka–Volterra form `∂_t v = ∂_xx v − c v + d u v`.
    Classic,
}

/// Two-species system `∂_t u = ∂_xx u + a u − b u v` with the predator
/// equation chosen by [`PredatorCoupling`], and boundary values
/// `base · (1 + cos t)` (excited) or `base` (constant).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredatorPrey {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub coupling: PredatorCoupling,
    pub u_left: f64,
    pub u_right: f64,
    pub v_left: f64,
    pub v_right: f64,
    pub excited: bool,
}

impl Default for PredatorPrey {
    fn default() -> Self {
        Self {
            a: 1.2,
            b: 1.0,
            c: 0.1,
            d: 0.2,
            coupling: PredatorCoupling::Printed,
            u_left: 1.0,
            u_right: 1.0,
            v_left: 1.0,
            v_right: 1.0,
            excited: true,
        }
    }
}

impl PredatorPrey {
    pub fn with_coupling(self, coupling: PredatorCoupling) -> Self {
        Self { coupling, ..self }
    }

    pub fn with_excitation(self, excited: bool) -> Self {
        Self { excited, ..self }
    }

    fn modulation(&self, t: f64) -> f64 {
        if self.excited {
            1.0 + t.cos()
        } else {
            1.0
        }
    }

    /// Reaction right-hand side for the pure ODE system.
    pub fn rates(&self, u: f64, v: f64) -> (f64, f64) {
        let du = self.a * u - self.b * u * v;
        let dv = match self.coupling {
            PredatorCoupling::Printed => -self.c * u - self.d * u * v,
            PredatorCoupling::Classic => -self.c * v + self.d * u * v,
        };
        (du, dv)
    }

    /// Coexistence equilibrium of the reaction-only system, if positive.
    pub fn equilibrium(&self) -> Option<(f64, f64)> {
        match self.coupling {
            PredatorCoupling::Classic => Some((self.c / self.d, self.a / self.b)),
            PredatorCoupling::Printed => None,
        }
    }
}

impl ReactionSystem for PredatorPrey {
    fn components(&self) -> usize {
        2
    }

    fn eval(&self, _pos: &[f64], _t: f64, u: &[f64], out: &mut [f64]) {
        let (du, dv) = self.rates(u[0], u[1]);
        out[0] = du;
        out[1] = dv;
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, u: &[f64], jac: &mut [f64]) {
        let (p, q) = (u[0], u[1]);
        jac[0] = self.a - self.b * q;
        jac[1] = -self.b * p;
        match self.coupling {
            PredatorCoupling::Printed => {
                jac[2] = -self.c - self.d * q;
                jac[3] = -self.d * p;
            }
            PredatorCoupling::Classic => {
                jac[2] = self.d * q;
                jac[3] = -self.c + self.d * p;
            }
        }
    }
}

impl Problem1D for PredatorPrey {
    fn name(&self) -> &str {
        "predprey1d"
    }

    /// Linear profile between the boundary values at `t = 0`.
    fn initial(&self, x: f64, out: &mut [f64]) {
        let s = x / PI;
        let g = self.modulation(0.0);
        out[0] = g * (self.u_left + s * (self.u_right - self.u_left));
        out[1] = g * (self.v_left + s * (self.v_right - self.v_left));
    }

    fn boundary(&self, t: f64) -> BoundaryValues {
        let g = self.modulation(t);
        BoundaryValues {
            left: vec![g * self.u_left, g * self.v_left],
            right: vec![g * self.u_right, g * self.v_right],
        }
    }
}

/// Sine modes decaying under diffusion and the linear reaction
/// `f(u) = −rate · u`, with homogeneous boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayingModes {
    pub rate: f64,
    /// `(k, amplitude)` pairs.
    pub modes: Vec<(usize, f64)>,
}

impl DecayingModes {
    /// Exact solution of the spatially discrete system on `grid`: each mode
    /// decays like `exp((Λ_k − rate) t)`.
    pub fn semidiscrete_solution(&self, grid: &Grid1D, x: f64, t: f64) -> f64 {
        self.modes
            .iter()
            .map(|&(k, b)| {
                let lam = laplacian_symbol(grid.spacing(), k);
                b * ((lam - self.rate) * t).exp() * (k as f64 * x).sin()
            })
            .sum()
    }
}

impl ReactionSystem for DecayingModes {
    fn components(&self) -> usize {
        1
    }

    fn eval(&self, _pos: &[f64], _t: f64, u: &[f64], out: &mut [f64]) {
        out[0] = -self.rate * u[0];
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, _u: &[f64], jac: &mut [f64]) {
        jac[0] = -self.rate;
    }
}

impl Problem1D for DecayingModes {
    fn name(&self) -> &str {
        "modes1d"
    }

    fn initial(&self, x: f64, out: &mut [f64]) {
        out[0] = self.modes.iter().map(|&(k, b)| b * (k as f64 * x).sin()).sum();
    }

    fn boundary(&self, _t: f64) -> BoundaryValues {
        BoundaryValues {
            left: vec![0.0],
            right: vec![0.0],
        }
    }

    fn exact(&self, x: f64, t: f64, out: &mut [f64]) -> bool {
        out[0] = self
            .modes
            .iter()
            .map(|&(k, b)| {
                let kk = k as f64;
                b * (-(kk * kk + self.rate) * t).exp() * (kk * x).sin()
            })
            .sum();
        true
    }
}

/// Pure heat equation with homogeneous data and a single-mode perturbation
/// `amplitude · sin(k x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedHeat {
    pub mode: usize,
    pub amplitude: f64,
}

impl ReactionSystem for PerturbedHeat {
    fn components(&self) -> usize {
        1
    }

    fn eval(&self, _pos: &[f64], _t: f64, _u: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, _u: &[f64], jac: &mut [f64]) {
        jac[0] = 0.0;
    }
}

impl Problem1D for PerturbedHeat {
    fn name(&self) -> &str {
        "perturbed-heat1d"
    }

    fn initial(&self, x: f64, out: &mut [f64]) {
        out[0] = self.amplitude * (self.mode as f64 * x).sin();
    }

    fn boundary(&self, _t: f64) -> BoundaryValues {
        BoundaryValues {
            left: vec![0.0],
            right: vec![0.0],
        }
    }

    fn exact(&self, x: f64, t: f64, out: &mut [f64]) -> bool {
        let k = self.mode as f64;
        out[0] = self.amplitude * (-k * k * t).exp() * (k * x).sin();
        true
    }
}

/// Scalar reaction `f(u) = Σ c_i uⁱ` (cubic at most) with constant Dirichlet
/// values and a linear initial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialReaction {
    pub coefficients: [f64; 4],
    pub left: f64,
    pub right: f64,
}

impl ReactionSystem for PolynomialReaction {
    fn components(&self) -> usize {
        1
    }

    fn eval(&self, _pos: &[f64], _t: f64, u: &[f64], out: &mut [f64]) {
        let c = &self.coefficients;
        out[0] = c[0] + u[0] * (c[1] + u[0] * (c[2] + u[0] * c[3]));
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, u: &[f64], jac: &mut [f64]) {
        let c = &self.coefficients;
        jac[0] = c[1] + u[0] * (2.0 * c[2] + 3.0 * u[0] * c[3]);
    }
}

impl Problem1D for PolynomialReaction {
    fn name(&self) -> &str {
        "custom"
    }

    fn initial(&self, x: f64, out: &mut [f64]) {
        out[0] = self.left + x / PI * (self.right - self.left);
    }

    fn boundary(&self, _t: f64) -> BoundaryValues {
        BoundaryValues {
            left: vec![self.left],
            right: vec![self.right],
        }
    }
}

/// `u*(x, y, t) = cos t · ((x/π)⁴ + cos 3x) · (cos 2y + (y/π)³)` with the
/// matching source in the reaction slot.
#[derive(Debug, Clone, Copy, Default)]
pub struct ManufacturedHeat2D;

impl ManufacturedHeat2D {
    fn px(x: f64) -> f64 {
        (x / PI).powi(4) + (3.0 * x).cos()
    }

    fn px_xx(x: f64) -> f64 {
        12.0 * x * x / PI.powi(4) - 9.0 * (3.0 * x).cos()
    }

    fn py(y: f64) -> f64 {
        (2.0 * y).cos() + (y / PI).powi(3)
    }

    fn py_yy(y: f64) -> f64 {
        -4.0 * (2.0 * y).cos() + 6.0 * y / PI.powi(3)
    }

    pub fn solution(&self, x: f64, y: f64, t: f64) -> f64 {
        t.cos() * Self::px(x) * Self::py(y)
    }

    pub fn source(&self, x: f64, y: f64, t: f64) -> f64 {
        -t.sin() * Self::px(x) * Self::py(y)
            - t.cos() * (Self::px_xx(x) * Self::py(y) + Self::px(x) * Self::py_yy(y))
    }
}

impl ReactionSystem for ManufacturedHeat2D {
    fn components(&self) -> usize {
        1
    }

    fn eval(&self, pos: &[f64], t: f64, _u: &[f64], out: &mut [f64]) {
        out[0] = self.source(pos[0], pos[1], t);
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, _u: &[f64], jac: &mut [f64]) {
        jac[0] = 0.0;
    }
}

impl Problem2D for ManufacturedHeat2D {
    fn name(&self) -> &str {
        "heat2d"
    }

    fn initial(&self, x: f64, y: f64, out: &mut [f64]) {
        out[0] = self.solution(x, y, 0.0);
    }

    fn boundary_value(&self, x: f64, y: f64, t: f64, out: &mut [f64]) {
        out[0] = self.solution(x, y, t);
    }

    fn exact(&self, x: f64, y: f64, t: f64, out: &mut [f64]) -> bool {
        out[0] = self.solution(x, y, t);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::jacobian_defect;

    #[test]
    fn manufactured_values() {
        let c = manufactured_heat_case();
        assert!((c.solution(0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!(c.solution(PI, 0.0).abs() < 1e-15);
        let bc = c.boundary(0.7);
        assert!((bc.left[0] - 0.7_f64.cos()).abs() < 1e-15);
        assert!(bc.right[0].abs() < 1e-15);
    }

    #[test]
    fn manufactured_source_residual() {
        let c = manufactured_heat_case();
        for i in 0..=20 {
            for t in [0.0, 0.3, 1.0, 2.5] {
                let x = PI * i as f64 / 20.0;
                let r = c.solution_t(x, t) - c.solution_xx(x, t) - c.source(x, t);
                assert!(r.abs() <= 1e-10);
                // independent check of the analytic derivatives
                let (e, ex) = (1e-4, 1e-3);
                let ut = (c.solution(x, t + e) - c.solution(x, t - e)) / (2.0 * e);
                let uxx = (c.solution(x + ex, t) - 2.0 * c.solution(x, t) + c.solution(x - ex, t)) / (ex * ex);
                assert!((ut - uxx - c.source(x, t)).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn manufactured_2d_source_residual() {
        let c = ManufacturedHeat2D;
        let (e, ex) = (1e-4, 1e-3);
        for (x, y, t) in [(0.3, 1.1, 0.2), (2.0, 0.5, 1.0), (1.0, 3.0, 0.7)] {
            let ut = (c.solution(x, y, t + e) - c.solution(x, y, t - e)) / (2.0 * e);
            let lap = (c.solution(x + ex, y, t) + c.solution(x - ex, y, t) + c.solution(x, y + ex, t)
                + c.solution(x, y - ex, t)
                - 4.0 * c.solution(x, y, t))
                / (ex * ex);
            assert!((ut - lap - c.source(x, y, t)).abs() < 1e-4);
        }
    }

    #[test]
    fn predator_prey_parameters_and_jacobians() {
        let p = PredatorPrey::default();
        assert_eq!((p.a, p.b, p.c, p.d), (1.2, 1.0, 0.1, 0.2));
        for coupling in [PredatorCoupling::Printed, PredatorCoupling::Classic] {
            let q = p.with_coupling(coupling);
            for u in [[0.5, 1.2], [2.0, 0.1], [0.0, 3.0]] {
                assert!(jacobian_defect(&q, &[0.0], 0.0, &u, 1e-7) < 1e-6);
            }
        }
        let bc = p.boundary(PI);
        assert!(bc.left.iter().chain(&bc.right).all(|v| v.abs() < 1e-15));
        let bc = p.with_excitation(false).boundary(PI);
        assert_eq!(bc.left, vec![1.0, 1.0]);
    }

    #[test]
    fn polynomial_jacobian() {
        let p = PolynomialReaction {
            coefficients: [0.5, -2.0, 3.0, -1.0],
            left: 0.0,
            right: 1.0,
        };
        assert!(jacobian_defect(&p, &[0.0], 0.0, &[0.7], 1e-7) < 1e-6);
    }
}
