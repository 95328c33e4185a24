//! Spectral (discrete Fourier) derivatives on the circle.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

/// Fourier-multiplier derivatives for `n` equispaced samples on `[0, 2 pi)`.
#[derive(Clone)]
pub struct AngularOps<T: Real> {
    n: usize,
    forward: Option<Arc<dyn Fft<T>>>,
    inverse: Option<Arc<dyn Fft<T>>>,
}

impl<T: Real> fmt::Debug for AngularOps<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AngularOps").field("n", &self.n).finish()
    }
}

impl<T: Real> AngularOps<T> {
    pub fn new(n: usize) -> Self {
        if n < 2 {
            return Self {
                n,
                forward: None,
                inverse: None,
            };
        }
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: Some(planner.plan_fft_forward(n)),
            inverse: Some(planner.plan_fft_inverse(n)),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed wavenumber of FFT bin `m`.
    fn wavenumber(&self, m: usize) -> i64 {
        let n = self.n as i64;
        let m = m as i64;
        if 2 * m <= n {
            m
        } else {
            m - n
        }
    }

    /// `d^order f / d theta^order`. Returns zeros when there is no angular axis.
    pub fn derivative(&self, f: &[T], order: u32) -> Vec<T> {
        let mut out = vec![T::zero(); f.len()];
        self.derivative_into(f, order, &mut out);
        out
    }

    pub fn derivative_into(&self, f: &[T], order: u32, out: &mut [T]) {
        assert_eq!(f.len(), self.n);
        assert_eq!(out.len(), self.n);
        let (Some(fwd), Some(inv)) = (&self.forward, &self.inverse) else {
            out.iter_mut().for_each(|v| *v = T::zero());
            return;
        };
        if order == 0 {
            out.copy_from_slice(f);
            return;
        }
        let mut buf: Vec<Complex<T>> = f.iter().map(|&x| Complex::new(x, T::zero())).collect();
        fwd.process(&mut buf);
        let n = self.n;
        let scale = T::one() / T::from_count(n);
        for (m, c) in buf.iter_mut().enumerate() {
            let k = self.wavenumber(m);
            // The Nyquist mode has no well-defined odd derivative.
            if n % 2 == 0 && 2 * m == n && order % 2 == 1 {
                *c = Complex::new(T::zero(), T::zero());
                continue;
            }
            let kk = T::lit(k as f64);
            // (i k)^order
            let mag = kk.powi(order as i32);
            let factor = match order % 4 {
                0 => Complex::new(mag, T::zero()),
                1 => Complex::new(T::zero(), mag),
                2 => Complex::new(-mag, T::zero()),
                _ => Complex::new(T::zero(), -mag),
            };
            *c = *c * factor * scale;
        }
        inv.process(&mut buf);
        for (o, c) in out.iter_mut().zip(&buf) {
            *o = c.re;
        }
    }

    /// Laplacian on the unit circle, `d^2/d theta^2`.
    pub fn laplacian(&self, f: &[T]) -> Vec<T> {
        self.derivative(f, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn samples(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..n)
            .map(|m| f(std::f64::consts::TAU * m as f64 / n as f64))
            .collect()
    }

    #[test]
    fn derivatives_of_trig_modes_are_exact() {
        let n = 16;
        let ops = AngularOps::<f64>::new(n);
        let f = samples(n, |t| (2.0 * t).cos() + 0.5 * (3.0 * t).sin());
        let d1 = ops.derivative(&f, 1);
        let d2 = ops.laplacian(&f);
        let d3 = ops.derivative(&f, 3);
        let e1 = samples(n, |t| -2.0 * (2.0 * t).sin() + 1.5 * (3.0 * t).cos());
        let e2 = samples(n, |t| -4.0 * (2.0 * t).cos() - 4.5 * (3.0 * t).sin());
        let e3 = samples(n, |t| 8.0 * (2.0 * t).sin() - 13.5 * (3.0 * t).cos());
        for m in 0..n {
            assert_abs_diff_eq!(d1[m], e1[m], epsilon = 1e-12);
            assert_abs_diff_eq!(d2[m], e2[m], epsilon = 1e-12);
            assert_abs_diff_eq!(d3[m], e3[m], epsilon = 1e-11);
        }
    }

    #[test]
    fn smooth_periodic_function_converges_fast() {
        let n = 32;
        let ops = AngularOps::<f64>::new(n);
        let f = samples(n, |t| t.cos().exp());
        let d = ops.derivative(&f, 1);
        let e = samples(n, |t| -t.sin() * t.cos().exp());
        for m in 0..n {
            assert_abs_diff_eq!(d[m], e[m], epsilon = 1e-12);
        }
    }

    #[test]
    fn no_angular_axis_gives_zero() {
        let ops = AngularOps::<f64>::new(1);
        assert_eq!(ops.derivative(&[3.0], 1), vec![0.0]);
    }

    #[test]
    fn works_in_single_precision() {
        let n = 8;
        let ops = AngularOps::<f32>::new(n);
        let f: Vec<f32> = (0..n)
            .map(|m| (std::f32::consts::TAU * m as f32 / n as f32).sin())
            .collect();
        let d = ops.derivative(&f, 1);
        for m in 0..n {
            let t = std::f32::consts::TAU * m as f32 / n as f32;
            assert!((d[m] - t.cos()).abs() < 1e-5);
        }
    }
}
