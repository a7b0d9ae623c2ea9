//! Frequency-dependent two-mode squeezing gain functions `f(ω)`, `g(ω)`.
//!
//! `f = cosh(sz) − i·(Δk/2s)·sinh(sz)` and `g = i·(γ/s)·sinh(sz)` with
//! `Δk(ω) = −κ(ω−ω₀)²`. The radicand of `s` comes in two flavours, see
//! [`GainConvention`]. Both are evaluated through `cosh(x)` and
//! `sinh(x)/s`, which are even in `s`, so the choice of square-root branch
//! never shows up in `f` or `g`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::FrequencyLattice;
use crate::numeric::sinc;

const SERIES_CROSSOVER: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainConvention {
    /// `s² = γ² − Δk²`, exactly as printed alongside the `Δk/2s` term.
    /// Violates `|f|² − |g|² = 1` wherever `Δk ≠ 0`.
    PaperLiteral,
    /// `s² = γ² − (Δk/2)²`, the variant that satisfies `|f|² − |g|² = 1`.
    #[default]
    Unitary,
}

impl GainConvention {
    fn mismatch_factor(self) -> f64 {
        match self {
            GainConvention::PaperLiteral => 1.0,
            GainConvention::Unitary => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainParams {
    /// Real gain coefficient γ, 1/length.
    pub gamma: f64,
    /// κ = k″/2, s²/length.
    pub kappa: f64,
    /// Crystal length.
    pub z: f64,
    #[serde(default)]
    pub convention: GainConvention,
    /// Remove the low-gain dispersive phase of `f` (pulse compressor).
    #[serde(default)]
    pub compensate_dispersion: bool,
}

impl GainParams {
    pub fn new(gamma: f64, kappa: f64, z: f64) -> Self {
        Self {
            gamma,
            kappa,
            z,
            convention: GainConvention::Unitary,
            compensate_dispersion: false,
        }
    }

    pub fn with_convention(mut self, convention: GainConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn compensated(mut self, on: bool) -> Self {
        self.compensate_dispersion = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParameter {
                field: "gamma",
                reason: format!("must be finite and non-negative (got {})", self.gamma),
            });
        }
        if !(self.z > 0.0) || !self.z.is_finite() {
            return Err(Error::InvalidParameter {
                field: "z",
                reason: format!("must be positive (got {})", self.z),
            });
        }
        if !self.kappa.is_finite() {
            return Err(Error::InvalidParameter {
                field: "kappa",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    pub fn gain_length(&self) -> f64 {
        self.gamma * self.z
    }
}

/// Tabulated `f`, `g` over a lattice together with the parameters that made them.
#[derive(Debug, Clone, PartialEq)]
pub struct GainProfile {
    pub lattice: FrequencyLattice,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub params: GainParams,
}

impl GainProfile {
    /// The identity transform `f ≡ 1`, `g ≡ 0`: the `g = 0` baseline used for
    /// vacuum subtraction.
    pub fn vacuum(lattice: FrequencyLattice) -> Self {
        let n = lattice.len();
        Self {
            lattice,
            f: vec![Complex64::new(1.0, 0.0); n],
            g: vec![Complex64::new(0.0, 0.0); n],
            params: GainParams::new(0.0, 0.0, 1.0),
        }
    }

    /// Wraps externally tabulated gain functions (synthetic profiles in tests).
    pub fn from_tables(
        lattice: FrequencyLattice,
        f: Vec<Complex64>,
        g: Vec<Complex64>,
        params: GainParams,
    ) -> Result<Self> {
        lattice.check_len(f.len())?;
        lattice.check_len(g.len())?;
        Ok(Self {
            lattice,
            f,
            g,
            params,
        })
    }

    /// `|g(ω)|²` per grid point.
    pub fn g_norm_sqr(&self) -> Vec<f64> {
        self.g.iter().map(|g| g.norm_sqr()).collect()
    }

    pub fn is_vacuum(&self) -> bool {
        self.g.iter().all(|g| *g == Complex64::new(0.0, 0.0))
    }

    /// Full width at half maximum of `|g|²`, measured on the lattice.
    pub fn spectral_width(&self) -> f64 {
        let s = self.g_norm_sqr();
        let peak = s.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let above: Vec<usize> = (0..s.len()).filter(|&k| s[k] >= 0.5 * peak).collect();
        let (lo, hi) = (above[0], above[above.len() - 1]);
        (self.lattice.detuning(hi) - self.lattice.detuning(lo)) + self.lattice.d_omega()
    }

    /// Indices where `|g|²` is at least `fraction` of its peak value.
    pub fn support(&self, fraction: f64) -> Vec<usize> {
        let s = self.g_norm_sqr();
        let peak = s.iter().cloned().fold(0.0, f64::max);
        (0..s.len()).filter(|&k| s[k] >= fraction * peak && peak > 0.0).collect()
    }
}

/// `Δk(ω) = −κ(ω−ω₀)²` per grid point.
pub fn phase_mismatch(lattice: &FrequencyLattice, kappa: f64) -> Vec<f64> {
    lattice
        .detunings()
        .into_iter()
        .map(|d| -kappa * d * d)
        .collect()
}

fn s_value(gamma: f64, delta_k: f64, convention: GainConvention) -> Complex64 {
    let half = delta_k * convention.mismatch_factor();
    Complex64::new(gamma * gamma - half * half, 0.0).sqrt()
}

/// Principal square root of the convention's radicand, per grid point.
pub fn s_of_omega(gamma: f64, delta_k: &[f64], convention: GainConvention) -> Vec<Complex64> {
    delta_k
        .iter()
        .map(|&dk| s_value(gamma, dk, convention))
        .collect()
}

/// `(cosh(sz), sinh(sz)/s)` with a series fallback near `sz = 0`.
fn cosh_and_sinhc(s: Complex64, z: f64) -> (Complex64, Complex64) {
    let x = s * z;
    if x.norm() < SERIES_CROSSOVER {
        let x2 = x * x;
        (1.0 + x2 / 2.0, z * (1.0 + x2 / 6.0))
    } else {
        (x.cosh(), x.sinh() / s)
    }
}

fn f_g_at(gamma: f64, delta_k: f64, z: f64, convention: GainConvention) -> (Complex64, Complex64) {
    let s = s_value(gamma, delta_k, convention);
    let (ch, sh_over_s) = cosh_and_sinhc(s, z);
    let i = Complex64::i();
    let f = ch - i * (delta_k / 2.0) * sh_over_s;
    let g = i * gamma * sh_over_s;
    (f, g)
}

pub fn gain_profile(lattice: &FrequencyLattice, params: &GainParams) -> Result<GainProfile> {
    params.validate()?;
    let dk = phase_mismatch(lattice, params.kappa);
    let (mut f, g): (Vec<_>, Vec<_>) = dk
        .iter()
        .map(|&d| f_g_at(params.gamma, d, params.z, params.convention))
        .unzip();
    if params.compensate_dispersion {
        for (fk, &d) in f.iter_mut().zip(&dk) {
            // phase of f in the γ → 0 limit of the same convention
            let (f0, _) = f_g_at(0.0, d, params.z, params.convention);
            *fk *= (f0 / f0.norm()).conj();
        }
    }
    Ok(GainProfile {
        lattice: *lattice,
        f,
        g,
        params: *params,
    })
}

/// `g → iγz · sin(κ(ω−ω₀)²z) / (κ(ω−ω₀)²z)`.
pub fn low_gain_g(lattice: &FrequencyLattice, params: &GainParams) -> Vec<Complex64> {
    let gz = params.gamma * params.z;
    lattice
        .detunings()
        .into_iter()
        .map(|d| Complex64::new(0.0, gz * sinc(params.kappa * d * d * params.z)))
        .collect()
}

/// `f → ½·e^{γz}·exp[−(κ²z/2γ)(ω−ω₀)⁴]`, `g → i·f`.
pub fn high_gain_asymptote(
    lattice: &FrequencyLattice,
    params: &GainParams,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let amp = 0.5 * (params.gamma * params.z).exp();
    let coef = params.kappa * params.kappa * params.z / (2.0 * params.gamma);
    let f: Vec<Complex64> = lattice
        .detunings()
        .into_iter()
        .map(|d| {
            let q = if d == 0.0 { 0.0 } else { coef * d.powi(4) };
            Complex64::new(amp * (-q).exp(), 0.0)
        })
        .collect();
    let g = f.iter().map(|v| Complex64::i() * v).collect();
    (f, g)
}

/// The quartic exponent `(κ²z/2γ)(ω−ω₀)⁴` of the high-gain asymptote.
pub fn high_gain_exponent(lattice: &FrequencyLattice, params: &GainParams) -> Vec<f64> {
    let coef = params.kappa * params.kappa * params.z / (2.0 * params.gamma);
    lattice
        .detunings()
        .into_iter()
        .map(|d| coef * d.powi(4))
        .collect()
}

/// Largest `| |f|² − |g|² − 1 |` over the profile, absolute and relative to `|f|²`.
pub fn bogoliubov_deviation(profile: &GainProfile) -> (f64, f64) {
    profile
        .f
        .iter()
        .zip(&profile.g)
        .fold((0.0f64, 0.0f64), |(abs_max, rel_max), (f, g)| {
            let fs = f.norm_sqr();
            let dev = (fs - g.norm_sqr() - 1.0).abs();
            (abs_max.max(dev), rel_max.max(dev / fs))
        })
}
