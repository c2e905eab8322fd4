//! The reaction term `f(x, t, u)` and its pointwise Jacobian.
//!
//! Only the `m × m` Jacobian at a single node is ever formed; the global
//! Jacobian of the semi-discrete system is never assembled.

/// Nonlinear source `f : (x, t, u) ↦ R^m`.
///
/// `pos` holds the node coordinates (one entry in 1D, two in 2D).
/// `jacobian` writes `∂f_i/∂u_j` row-major into `jac[i * m + j]`.
pub trait ReactionSystem: Send + Sync {
    fn components(&self) -> usize;

    fn eval(&self, pos: &[f64], t: f64, u: &[f64], out: &mut [f64]);

    fn jacobian(&self, pos: &[f64], t: f64, u: &[f64], jac: &mut [f64]);
}

/// `f ≡ 0`: pure diffusion.
#[derive(Debug, Clone, Copy)]
pub struct NoReaction {
    pub m: usize,
}

impl ReactionSystem for NoReaction {
    fn components(&self) -> usize {
        self.m
    }

    fn eval(&self, _pos: &[f64], _t: f64, _u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, _u: &[f64], jac: &mut [f64]) {
        jac.fill(0.0);
    }
}

/// Scalar linear reaction `f(u) = rate · u`.
#[derive(Debug, Clone, Copy)]
pub struct LinearReaction {
    pub rate: f64,
}

impl ReactionSystem for LinearReaction {
    fn components(&self) -> usize {
        1
    }

    fn eval(&self, _pos: &[f64], _t: f64, u: &[f64], out: &mut [f64]) {
        out[0] = self.rate * u[0];
    }

    fn jacobian(&self, _pos: &[f64], _t: f64, _u: &[f64], jac: &mut [f64]) {
        jac[0] = self.rate;
    }
}

/// Largest deviation between the analytic Jacobian and forward differences
/// `(f(u + ε e_j) − f(u)) / ε`, over all entries.
pub fn jacobian_defect(
    system: &dyn ReactionSystem,
    pos: &[f64],
    t: f64,
    u: &[f64],
    eps: f64,
) -> f64 {
    let m = system.components();
    let mut jac = vec![0.0; m * m];
    system.jacobian(pos, t, u, &mut jac);
    let mut base = vec![0.0; m];
    system.eval(pos, t, u, &mut base);
    let mut bumped = u.to_vec();
    let mut shifted = vec![0.0; m];
    let mut worst = 0.0_f64;
    for j in 0..m {
        bumped[j] = u[j] + eps;
        system.eval(pos, t, &bumped, &mut shifted);
        bumped[j] = u[j];
        for i in 0..m {
            let fd = (shifted[i] - base[i]) / eps;
            worst = worst.max((fd - jac[i * m + j]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_jacobians_are_consistent() {
        let lin = LinearReaction { rate: -3.5 };
        assert!(jacobian_defect(&lin, &[0.3], 0.0, &[1.7], 1e-7) < 1e-6);
        let zero = NoReaction { m: 3 };
        assert_eq!(jacobian_defect(&zero, &[0.3], 0.0, &[1.0, 2.0, 3.0], 1e-7), 0.0);
    }
}
