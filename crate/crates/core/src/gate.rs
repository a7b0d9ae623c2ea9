//! Rectangular temporal gate of duration `T`, applied in the frequency domain.
//!
//! The window transform `W(Δ) = T·sinc(ΔT/2)` convolves the ungated field,
//! and the overlap kernel `D(Δ) = ∫ dω′/2π W(ω−ω′)W(ω̃−ω′)` reduces to the
//! same sinc for a long gate. `D` is tabulated by lattice offset only.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::FrequencyLattice;
use crate::numeric::sinc;

/// Minimum `T × spectral width` for the long-gate approximations to apply.
pub const COHERENCE_PRODUCT_MIN: f64 = 50.0;

/// `W(Δ) = T·sin(ΔT/2)/(ΔT/2)`.
pub fn window_transform(duration: f64, delta_omega: f64) -> f64 {
    duration * sinc(0.5 * delta_omega * duration)
}

/// `D(Δ) = T·sinc(ΔT/2)`, the commutator of gated operators.
pub fn overlap_kernel(duration: f64, delta_omega: f64) -> f64 {
    let x = 0.5 * delta_omega * duration;
    if x == 0.0 {
        duration
    } else {
        duration * sinc(x)
    }
}

#[derive(Debug, Clone)]
pub struct GateKernel {
    duration: f64,
    lattice: FrequencyLattice,
    /// `D` at offsets `−(M−1) ..= M−1`, index `offset + M − 1`.
    d_table: Vec<f64>,
}

impl GateKernel {
    pub fn new(duration: f64, lattice: FrequencyLattice) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::InvalidParameter {
                field: "duration",
                reason: format!("gate duration must be positive (got {duration})"),
            });
        }
        let m = lattice.len() as i64;
        let d_table = (-(m - 1)..m)
            .map(|off| overlap_kernel(duration, off as f64 * lattice.d_omega()))
            .collect();
        Ok(Self {
            duration,
            lattice,
            d_table,
        })
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    /// `D(offset · dω)` for an integer lattice offset.
    pub fn d_offset(&self, offset: i64) -> f64 {
        self.d_table[(offset + self.lattice.len() as i64 - 1) as usize]
    }

    /// `D(ω_j − ω_k)`.
    pub fn d(&self, j: usize, k: usize) -> f64 {
        self.d_offset(j as i64 - k as i64)
    }

    /// `D(2ω₀ − ω_j − ω_k)`.
    pub fn d_anti(&self, j: usize, k: usize) -> f64 {
        self.d_offset(2 * self.lattice.center_index() as i64 - j as i64 - k as i64)
    }

    /// Lattice quadrature of `∫ dΔ/2π D(Δ)` over offsets spanning the band.
    pub fn integral_d(&self) -> f64 {
        let c = self.lattice.center_index() as i64;
        let sum: f64 = (-c..=c).map(|o| self.d_offset(o)).sum();
        sum * self.lattice.measure()
    }

    /// Lattice quadrature of `∫ dΔ/2π D(Δ)²` over offsets spanning the band.
    pub fn integral_d_squared(&self) -> f64 {
        let c = self.lattice.center_index() as i64;
        let sum: f64 = (-c..=c).map(|o| self.d_offset(o).powi(2)).sum();
        sum * self.lattice.measure()
    }

    /// Bound on `|1 − ∫_{|Δ|<H} dΔ/2π D|` from `|∫_X^∞ sin u/u du| ≤ 2/X`, `X = HT/2`.
    pub fn tail_bound_d(&self) -> f64 {
        let x = 0.5 * self.lattice.half_width() * self.duration;
        (2.0 / PI) * (2.0 / x)
    }

    /// Bound on `|T − ∫_{|Δ|<H} dΔ/2π D²|` from `∫_X^∞ sin²u/u² du ≤ 1/X`.
    pub fn tail_bound_d_squared(&self) -> f64 {
        let x = 0.5 * self.lattice.half_width() * self.duration;
        2.0 * self.duration / (PI * x)
    }

    /// `T × width`; warns when below [`COHERENCE_PRODUCT_MIN`].
    pub fn coherence_product(&self, spectral_width: f64) -> f64 {
        let p = self.duration * spectral_width;
        if p < COHERENCE_PRODUCT_MIN {
            log::warn!(
                "gate duration × spectral width = {p:.1} < {COHERENCE_PRODUCT_MIN}; long-gate approximations degrade"
            );
        }
        p
    }

    /// Lattice evaluation of `∫ dω′/2π W(ω_j−ω′)W(ω_k−ω′)`.
    pub fn kernel_overlap(&self, j: usize, k: usize) -> f64 {
        let lat = &self.lattice;
        (0..lat.len())
            .map(|i| {
                window_transform(self.duration, lat.detuning(j) - lat.detuning(i))
                    * window_transform(self.duration, lat.detuning(k) - lat.detuning(i))
            })
            .sum::<f64>()
            * lat.measure()
    }
}

/// Direct `O(M²)` quadrature `A[k] = Σ_j measure·W(ω_k−ω_j)·a[j]`.
pub fn gate_field_direct(realization: &[Complex64], kernel: &GateKernel) -> Result<Vec<Complex64>> {
    let lat = kernel.lattice();
    lat.check_len(realization.len())?;
    let m = lat.measure();
    Ok((0..lat.len())
        .map(|k| {
            realization
                .iter()
                .enumerate()
                .map(|(j, a)| a * (m * kernel.d(k, j)))
                .sum()
        })
        .collect())
}

/// FFT-backed linear convolution with the window, reusable across realizations.
#[derive(Clone)]
pub struct GateConvolver {
    n: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    kernel_spectrum: Vec<Complex64>,
}

impl GateConvolver {
    pub fn new(kernel: &GateKernel) -> Self {
        let n = kernel.lattice().len();
        let fft_len = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(fft_len);
        let inverse = planner.plan_fft_inverse(fft_len);
        let m = kernel.lattice().measure();
        let mut h = vec![Complex64::new(0.0, 0.0); fft_len];
        h[0] = Complex64::new(m * kernel.d_offset(0), 0.0);
        for off in 1..n {
            h[off] = Complex64::new(m * kernel.d_offset(off as i64), 0.0);
            h[fft_len - off] = Complex64::new(m * kernel.d_offset(-(off as i64)), 0.0);
        }
        forward.process(&mut h);
        Self {
            n,
            fft_len,
            forward,
            inverse,
            kernel_spectrum: h,
        }
    }

    pub fn apply(&self, realization: &[Complex64]) -> Result<Vec<Complex64>> {
        if realization.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: realization.len(),
            });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        buf[..self.n].copy_from_slice(realization);
        self.forward.process(&mut buf);
        for (b, h) in buf.iter_mut().zip(&self.kernel_spectrum) {
            *b *= h;
        }
        self.inverse.process(&mut buf);
        let norm = 1.0 / self.fft_len as f64;
        Ok(buf[..self.n].iter().map(|v| v * norm).collect())
    }
}

/// Gates one realization by FFT convolution.
pub fn gate_field(realization: &[Complex64], kernel: &GateKernel) -> Result<Vec<Complex64>> {
    GateConvolver::new(kernel).apply(realization)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn window_examples() {
        assert_eq!(window_transform(3.0, 0.0), 3.0);
        assert!(window_transform(2.0, PI).abs() < 1e-15);
        assert_relative_eq!(window_transform(2.0, 1.0), 1.682_941_969_615_793, epsilon = 1e-14);
    }

    #[test]
    fn overlap_has_window_form() {
        for i in 0..200 {
            let delta = -7.0 + 0.07 * i as f64;
            assert_eq!(overlap_kernel(4.5, delta), window_transform(4.5, delta));
        }
        assert_eq!(overlap_kernel(4.5, 0.0), 4.5);
    }

    #[test]
    fn kernel_table_by_offset() {
        let lat = FrequencyLattice::new(20.0, 2.0, 41).unwrap();
        let k = GateKernel::new(10.0, lat).unwrap();
        assert_eq!(k.d(7, 7), 10.0);
        assert_eq!(k.d(3, 9), k.d(9, 3));
        assert_eq!(k.d(3, 9), overlap_kernel(10.0, -6.0 * lat.d_omega()));
        assert_eq!(k.d_anti(0, 40), 10.0);
        assert!(GateKernel::new(0.0, lat).is_err());
    }

    #[test]
    fn zero_realization_stays_zero() {
        let lat = FrequencyLattice::new(20.0, 2.0, 41).unwrap();
        let k = GateKernel::new(10.0, lat).unwrap();
        let out = gate_field(&vec![Complex64::new(0.0, 0.0); 41], &k).unwrap();
        assert!(out.iter().all(|v| v.norm() == 0.0));
        assert!(gate_field(&[Complex64::new(0.0, 0.0); 3], &k).is_err());
    }

    #[test]
    fn long_gate_passes_constant_through() {
        // dω·T = 0.5: W is well resolved and narrow compared with the band
        let lat = FrequencyLattice::new(20.0, 4.0, 801).unwrap();
        let k = GateKernel::new(50.0, lat).unwrap();
        let c = Complex64::new(0.3, -1.2);
        let out = gate_field(&vec![c; 801], &k).unwrap();
        for (idx, v) in out.iter().enumerate().take(601).skip(200) {
            assert!((v - c).norm() / c.norm() < 0.02, "{idx}: {v}");
        }
    }

    #[test]
    fn normalization_integrals() {
        let lat = FrequencyLattice::new(20.0, 1.0, 1601).unwrap();
        let k = GateKernel::new(400.0, lat).unwrap();
        assert!((k.integral_d() - 1.0).abs() <= 2.0 * k.tail_bound_d());
        assert!((k.integral_d_squared() - 400.0).abs() <= 2.0 * k.tail_bound_d_squared());
    }

    #[test]
    fn kernel_self_consistency() {
        let lat = FrequencyLattice::new(20.0, 4.0, 801).unwrap();
        let k = GateKernel::new(50.0, lat).unwrap();
        for (j, l) in [(400, 400), (400, 402), (380, 395), (420, 410)] {
            let num = k.kernel_overlap(j, l);
            // truncation of the 1/Δ² tail at distance ≥ 2 from the band edge
            assert!((num - k.d(j, l)).abs() < 0.01 * 50.0, "{j},{l}: {num} vs {}", k.d(j, l));
        }
    }
}
