//! Monte Carlo bookkeeping: per-realization random streams, per-realization
//! sample matrices, and delete-one jackknife error bars.
//!
//! Every estimator stores one row per realization and reduces rows in index
//! order, so results do not depend on how realizations were distributed
//! over worker threads.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::ops::{Add, Div, Mul, Sub};

use crate::error::{Error, Result};

/// Independent random stream `stream` of the master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub trait Sample:
    Copy
    + Send
    + Sync
    + PartialEq
    + std::fmt::Debug
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn modulus_sqr(self) -> f64;
}

impl Sample for f64 {
    fn modulus_sqr(self) -> f64 {
        self * self
    }
}

impl Sample for Complex64 {
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }
}

/// Mean and delete-one jackknife standard error of `samples`.
///
/// For complex samples the error is the root of the summed real and
/// imaginary variances.
pub fn jackknife_mean<V: Sample>(samples: &[V]) -> (V, f64) {
    let n = samples.len();
    let total = samples.iter().fold(V::zero(), |acc, &x| acc + x);
    let mean = total / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let nm1 = (n - 1) as f64;
    // leave-one-out means θ_i = (S − x_i)/(n−1); their average is S/n
    let spread: f64 = samples
        .iter()
        .map(|&x| ((total - x) / nm1 - mean).modulus_sqr())
        .sum();
    (mean, (nm1 / n as f64 * spread).sqrt())
}

/// Identifies the random numbers behind a Monte Carlo estimate; two estimates
/// with equal lineage were computed from the same vacuum realizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lineage {
    pub seed: u64,
    pub n_realizations: usize,
    pub p_sf: f64,
}

/// One row per realization, one column per probe.
#[derive(Debug, Clone)]
pub struct McSamples<V> {
    pub lineage: Lineage,
    pub data: Array2<V>,
}

impl<V: Sample> McSamples<V> {
    pub fn from_rows(lineage: Lineage, rows: Vec<Vec<V>>) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let flat: Vec<V> = rows.into_iter().flatten().collect();
        let data = Array2::from_shape_vec((n_rows, n_cols), flat)
            .expect("rows of equal length");
        Self { lineage, data }
    }

    pub fn n_realizations(&self) -> usize {
        self.data.nrows()
    }

    /// Column means and jackknife errors.
    pub fn estimates(&self) -> (Vec<V>, Vec<f64>) {
        self.data
            .axis_iter(Axis(1))
            .map(|col| jackknife_mean(&col.to_vec()))
            .unzip()
    }

    /// Row-by-row difference against a baseline sharing the same lineage.
    pub fn paired_difference(&self, baseline: &McSamples<V>) -> Result<McSamples<V>> {
        if self.lineage != baseline.lineage {
            return Err(Error::RenormalizationMismatch(format!(
                "Monte Carlo inputs come from different random streams ({:?} vs {:?})",
                self.lineage, baseline.lineage
            )));
        }
        if self.data.dim() != baseline.data.dim() {
            return Err(Error::RenormalizationMismatch(format!(
                "sample shapes differ: {:?} vs {:?}",
                self.data.dim(),
                baseline.data.dim()
            )));
        }
        Ok(McSamples {
            lineage: self.lineage,
            data: &self.data - &baseline.data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn jackknife_of_mean_matches_textbook_error() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 * 0.3).collect();
        let (mean, se) = jackknife_mean(&xs);
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let s2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - m).abs() < 1e-14);
        assert!((se - (s2 / n).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complex_error_combines_parts() {
        let xs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        let (mean, se) = jackknife_mean(&xs);
        assert_eq!(mean, Complex64::new(0.0, 0.0));
        let re: Vec<f64> = xs.iter().map(|x| x.re).collect();
        let im: Vec<f64> = xs.iter().map(|x| x.im).collect();
        let expect = (jackknife_mean(&re).1.powi(2) + jackknife_mean(&im).1.powi(2)).sqrt();
        assert!((se - expect).abs() < 1e-15);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream_rng(7, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| stream_rng(7, 3).random()).collect();
        assert_eq!(a, b);
        let mut r1 = stream_rng(7, 3);
        let mut r2 = stream_rng(7, 4);
        assert_ne!(r1.random::<u64>(), r2.random::<u64>());
    }

    #[test]
    fn paired_difference_requires_same_lineage() {
        let lin = Lineage {
            seed: 1,
            n_realizations: 2,
            p_sf: 0.5,
        };
        let a = McSamples::from_rows(lin, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let b = McSamples::from_rows(lin, vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        let d = a.paired_difference(&b).unwrap();
        assert_eq!(d.data[[1, 1]], 3.5);
        let other = McSamples::from_rows(Lineage { seed: 2, ..lin }, vec![vec![0.0, 0.0]; 2]);
        assert!(a.paired_difference(&other).is_err());
    }
}
