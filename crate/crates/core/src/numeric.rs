//! Small numerical helpers shared across modules: the `sin(x)/x` kernel,
//! an error-free double-f64 accumulator, and a log-log slope fit.

use num_complex::Complex64;
use std::ops::{Add, Sub};

/// `sin(x)/x` with the removable singularity at zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Unevaluated sum `hi + lo` carrying roughly twice the precision of f64.
///
/// Used where a closed-form result is later differenced against a baseline
/// that is many orders of magnitude larger than the difference (vacuum
/// subtraction of integrated photon numbers).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleF64 {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl DoubleF64 {
    pub const ZERO: DoubleF64 = DoubleF64 { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact sum of two f64 values.
    pub fn sum_of(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Self { hi, lo }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn scale(self, k: f64) -> Self {
        let p = self.hi * k;
        let e = self.hi.mul_add(k, -p);
        let (hi, lo) = quick_two_sum(p, e + self.lo * k);
        Self { hi, lo }
    }
}

impl Add for DoubleF64 {
    type Output = DoubleF64;
    fn add(self, rhs: DoubleF64) -> DoubleF64 {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + rhs.lo);
        DoubleF64 { hi, lo }
    }
}

impl Sub for DoubleF64 {
    type Output = DoubleF64;
    fn sub(self, rhs: DoubleF64) -> DoubleF64 {
        self + DoubleF64 {
            hi: -rhs.hi,
            lo: -rhs.lo,
        }
    }
}

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = DoubleF64::ZERO;
    for v in values {
        acc = acc + DoubleF64::new(v);
    }
    acc.value()
}

/// Compensated complex sum, real and imaginary parts accumulated separately.
pub fn compensated_sum_c<I: IntoIterator<Item = Complex64>>(values: I) -> Complex64 {
    let mut re = DoubleF64::ZERO;
    let mut im = DoubleF64::ZERO;
    for v in values {
        re = re + DoubleF64::new(v.re);
        im = im + DoubleF64::new(v.im);
    }
    Complex64::new(re.value(), im.value())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
