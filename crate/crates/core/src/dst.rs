//! Type-I discrete sine transform through a complex FFT of the odd
//! extension.
//!
//! For interior values `v_1..v_{N−1}` the forward transform returns
//! `S_k = Σ_j v_j sin(π j k / N)`, `k = 1..N−1`, and the synthesis
//! `v_j = (2/N) Σ_k S_k sin(π j k / N)` inverts it. The FFT has length `2N`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned DST-I for a fixed number of intervals `N`.
#[derive(Clone)]
pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform").field("n", &self.n).finish()
    }
}

impl SineTransform {
    pub fn new(n_intervals: usize) -> Self {
        assert!(n_intervals >= 2);
        let fft = FftPlanner::new().plan_fft_forward(2 * n_intervals);
        Self { n: n_intervals, fft }
    }

    pub fn n_intervals(&self) -> usize {
        self.n
    }

    /// Unnormalized sine sums of `interior` (length `N − 1`) into `out`.
    pub fn forward(&self, interior: &[f64], out: &mut [f64]) {
        let n = self.n;
        assert_eq!(interior.len(), n - 1);
        assert_eq!(out.len(), n - 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
        for (j, &v) in interior.iter().enumerate() {
            buf[j + 1].re = v;
            buf[2 * n - j - 1].re = -v;
        }
        self.fft.process(&mut buf);
        // W_k = -2i S_k for the odd sequence
        for (k, o) in out.iter_mut().enumerate() {
            *o = -0.5 * buf[k + 1].im;
        }
    }

    /// Synthesis from sine sums: inverse of [`forward`](Self::forward).
    pub fn inverse(&self, coeffs: &[f64], out: &mut [f64]) {
        self.forward(coeffs, out);
        let scale = 2.0 / self.n as f64;
        out.iter_mut().for_each(|v| *v *= scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dense(v: &[f64]) -> Vec<f64> {
        let n = v.len() + 1;
        (1..n)
            .map(|k| {
                v.iter()
                    .enumerate()
                    .map(|(i, x)| x * (PI * ((i + 1) * k) as f64 / n as f64).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_dense_sum() {
        for n in [2, 3, 8, 13, 16] {
            let t = SineTransform::new(n);
            let v: Vec<f64> = (1..n).map(|j| ((j * 7 % 5) as f64 - 2.0) * 0.3).collect();
            let mut out = vec![0.0; n - 1];
            t.forward(&v, &mut out);
            for (a, b) in out.iter().zip(dense(&v)) {
                assert!((a - b).abs() < 1e-13, "n={n}");
            }
        }
    }

    #[test]
    fn round_trip() {
        let n = 256;
        let t = SineTransform::new(n);
        let v: Vec<f64> = (1..n).map(|j| (j as f64 * 0.37).cos() + 0.01 * j as f64).collect();
        let mut s = vec![0.0; n - 1];
        let mut back = vec![0.0; n - 1];
        t.forward(&v, &mut s);
        t.inverse(&s, &mut back);
        let scale = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }
}
