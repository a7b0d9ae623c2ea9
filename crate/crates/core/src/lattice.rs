//! Uniform frequency grid standing in for the continuous ω axis.
//!
//! Every continuum integral `∫ dω/2π` becomes `Σ_k samples[k] · measure`
//! with `measure = dω/2π`, and the Dirac delta `2πδ(ω−ω′)` becomes a
//! column with `delta_peak = 2π/dω` on the diagonal. The two conventions
//! multiply to one, so the discrete identity `∫ dω/2π · 2πδ = 1` holds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, compensated_sum_c};

/// Ratio below which `|g(edge)|² / |g(ω₀)|²` counts as a negligible band-edge leak.
pub const EDGE_LEAK_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyLattice {
    omega0: f64,
    half_width: f64,
    n_points: usize,
    d_omega: f64,
}

/// Discrete stand-ins for `2πδ(0)` and the quadrature weight of `∫ dω/2π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationRules {
    pub delta_peak: f64,
    pub measure: f64,
}

impl FrequencyLattice {
    pub fn new(omega0: f64, half_width: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidLattice(format!(
                "n_points must be at least 3 (got {n_points})"
            )));
        }
        if n_points.is_multiple_of(2) {
            return Err(Error::InvalidLattice(format!(
                "n_points must be odd so that ω₀ is a grid point (got {n_points})"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "half_width must be positive (got {half_width})"
            )));
        }
        if !(half_width < omega0) || !omega0.is_finite() {
            return Err(Error::InvalidLattice(format!(
                "half_width {half_width} must be below omega0 {omega0}"
            )));
        }
        let d_omega = 2.0 * half_width / (n_points - 1) as f64;
        Ok(Self {
            omega0,
            half_width,
            n_points,
            d_omega,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    pub fn center_index(&self) -> usize {
        (self.n_points - 1) / 2
    }

    /// `ω_k − ω₀`, computed from the integer offset so that mirror pairs are
    /// exact negatives of each other.
    pub fn detuning(&self, k: usize) -> f64 {
        (k as i64 - self.center_index() as i64) as f64 * self.d_omega
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.omega0 + self.detuning(k)
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.omega(k)).collect()
    }

    pub fn detunings(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.detuning(k)).collect()
    }

    /// Index of `2ω₀ − ω_k`.
    pub fn mirror_index(&self, k: usize) -> usize {
        self.n_points - 1 - k
    }

    /// Index of the lattice point at `ω_i + ω_j − ω_k`, if it lies in the band.
    pub fn sum_partner(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let idx = i as i64 + j as i64 - k as i64;
        (0..self.n_points as i64)
            .contains(&idx)
            .then_some(idx as usize)
    }

    /// Index of `ω₃ − ω_i` for `ω₃ = 2ω₀ + q·dω`, if it lies in the band.
    pub fn sum_frequency_partner(&self, q: i64, i: usize) -> Option<usize> {
        let idx = 2 * self.center_index() as i64 + q - i as i64;
        (0..self.n_points as i64)
            .contains(&idx)
            .then_some(idx as usize)
    }

    pub fn rules(&self) -> DiscretizationRules {
        DiscretizationRules {
            delta_peak: 2.0 * PI / self.d_omega,
            measure: self.d_omega / (2.0 * PI),
        }
    }

    pub fn measure(&self) -> f64 {
        self.rules().measure
    }

    pub fn delta_peak(&self) -> f64 {
        self.rules().delta_peak
    }

    /// The discrete `2πδ(ω − ω_j)` column.
    pub fn delta_column(&self, j: usize) -> Vec<Complex64> {
        let mut col = vec![Complex64::new(0.0, 0.0); self.n_points];
        col[j] = Complex64::new(self.delta_peak(), 0.0);
        col
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_points {
            return Err(Error::LengthMismatch {
                expected: self.n_points,
                actual: len,
            });
        }
        Ok(())
    }

    pub fn integrate(&self, samples: &[Complex64]) -> Result<Complex64> {
        self.check_len(samples.len())?;
        Ok(compensated_sum_c(samples.iter().copied()) * self.measure())
    }

    pub fn integrate_real(&self, samples: &[f64]) -> Result<f64> {
        self.check_len(samples.len())?;
        Ok(compensated_sum(samples.iter().copied()) * self.measure())
    }

    /// Larger of the two band-edge values relative to the center value.
    pub fn edge_leak(&self, samples: &[f64]) -> f64 {
        let center = samples[self.center_index()].abs();
        let edge = samples[0].abs().max(samples[self.n_points - 1].abs());
        if center == 0.0 {
            if edge == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            edge / center
        }
    }

    /// Logs a warning and returns `false` when the band edges carry more than
    /// [`EDGE_LEAK_THRESHOLD`] of the center value.
    pub fn check_edges(&self, samples: &[f64], what: &str) -> bool {
        let leak = self.edge_leak(samples);
        if leak > EDGE_LEAK_THRESHOLD {
            log::warn!("{what}: band-edge leak {leak:.3e} exceeds {EDGE_LEAK_THRESHOLD:e}; widen half_width");
            false
        } else {
            true
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_point_grid() {
        let lat = FrequencyLattice::new(1.0, 0.1, 3).unwrap();
        let w = lat.omegas();
        assert_relative_eq!(w[0], 0.9, epsilon = 1e-15);
        assert_eq!(w[1], 1.0);
        assert_relative_eq!(w[2], 1.1, epsilon = 1e-15);
        assert_relative_eq!(lat.d_omega(), 0.1, epsilon = 1e-15);
        assert_eq!(lat.mirror_index(0), 2);
        assert_relative_eq!(lat.omega(2), 2.0 * 1.0 - 0.9, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            FrequencyLattice::new(1.0, 0.1, 4),
            Err(Error::InvalidLattice(_))
        ));
        assert!(FrequencyLattice::new(1.0, 1.0, 5).is_err());
        assert!(FrequencyLattice::new(1.0, 1.5, 5).is_err());
        assert!(FrequencyLattice::new(1.0, 0.0, 5).is_err());
        assert!(FrequencyLattice::new(1.0, 0.1, 1).is_err());
    }

    #[test]
    fn integrate_examples() {
        let lat = FrequencyLattice::new(1.0, 0.1, 3).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); 3];
        assert_relative_eq!(lat.integrate(&ones).unwrap().re, 0.047_746_482_927_568_6, epsilon = 1e-12);
        let zeros = vec![Complex64::new(0.0, 0.0); 3];
        assert_eq!(lat.integrate(&zeros).unwrap(), Complex64::new(0.0, 0.0));
        assert!(matches!(
            lat.integrate(&ones[..2]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn delta_columns_integrate_to_one() {
        let lat = FrequencyLattice::new(50.0, 3.0, 101).unwrap();
        let r = lat.rules();
        assert!((r.delta_peak * r.measure - 1.0).abs() < 1e-15);
        for j in 0..lat.len() {
            let v = lat.integrate(&lat.delta_column(j)).unwrap();
            assert!((v.re - 1.0).abs() < 1e-15 && v.im == 0.0);
        }
    }

    #[test]
    fn mirror_detunings_are_exact_negatives() {
        let lat = FrequencyLattice::new(10.0, 1.7, 1001).unwrap();
        for k in 0..lat.len() {
            assert_eq!(lat.detuning(k), -lat.detuning(lat.mirror_index(k)));
        }
    }

    #[test]
    fn partners() {
        let lat = FrequencyLattice::new(10.0, 1.0, 11).unwrap();
        assert_eq!(lat.sum_partner(2, 3, 4), Some(1));
        assert_eq!(lat.sum_partner(0, 0, 1), None);
        // ω₃ = 2ω₀: partner of k is its mirror
        for k in 0..11 {
            assert_eq!(lat.sum_frequency_partner(0, k), Some(lat.mirror_index(k)));
        }
        assert_eq!(lat.sum_frequency_partner(3, 0), None);
    }

    #[test]
    fn edge_leak_ratio() {
        let lat = FrequencyLattice::new(10.0, 1.0, 5).unwrap();
        assert_eq!(lat.edge_leak(&[1e-7, 0.5, 1.0, 0.5, 2e-7]), 2e-7);
        assert!(lat.check_edges(&[1e-7, 0.5, 1.0, 0.5, 1e-7], "test"));
        assert!(!lat.check_edges(&[1e-3, 0.5, 1.0, 0.5, 1e-7], "test"));
    }
}
