//! Energy of the stochastic vacuum in a single temporal mode.

use num_complex::Complex64;
use serde::Serialize;

use crate::correlator::{ProbeResult, ResultContext, ScalarResult};
use crate::error::{Error, Result};
use crate::lattice::FrequencyLattice;
use crate::sf_engine::estimate::collect_rows;
use crate::sf_engine::{NoiseSpec, Realizations};

pub const NORM_TOLERANCE: f64 = 1e-10;
pub const LEAK_THRESHOLD: f64 = 1e-6;
/// Outer fraction of the half band, on each side, that counts as the edge.
pub const EDGE_FRACTION: f64 = 0.05;

/// Frequency-domain mode function `ψ(ω)` with `∫đω |ψ|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMode {
    lattice: FrequencyLattice,
    psi: Vec<Complex64>,
}

impl TemporalMode {
    pub fn new(lattice: FrequencyLattice, psi: Vec<Complex64>) -> Result<Self> {
        lattice.check_len(psi.len())?;
        let m = lattice.measure();
        let norm: f64 = m * psi.iter().map(|p| p.norm_sqr()).sum::<f64>();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::ModeNotNormalized { norm });
        }
        let edge = (1.0 - EDGE_FRACTION) * lattice.half_width();
        let leaked: f64 = m * (0..lattice.len())
            .filter(|&k| lattice.detuning(k).abs() > edge)
            .map(|k| psi[k].norm_sqr())
            .sum::<f64>();
        if leaked / norm > LEAK_THRESHOLD {
            return Err(Error::ModeLeak {
                fraction: leaked / norm,
            });
        }
        Ok(Self { lattice, psi })
    }

    fn normalized(lattice: FrequencyLattice, raw: Vec<f64>) -> Result<Self> {
        let norm = (lattice.measure() * raw.iter().map(|v| v * v).sum::<f64>()).sqrt();
        Self::new(lattice, raw.into_iter().map(|v| Complex64::new(v / norm, 0.0)).collect())
    }

    /// Gaussian amplitude with intensity standard deviation `width`.
    pub fn gaussian(lattice: FrequencyLattice, center: f64, width: f64) -> Result<Self> {
        Self::hermite_gaussian(lattice, center, width, 0)
    }

    /// `H_n(x)·exp(−x²/2)` with `x = (ω − center)/(√2·width)`.
    pub fn hermite_gaussian(lattice: FrequencyLattice, center: f64, width: f64, order: u32) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter {
                field: "width",
                reason: format!("mode width must be positive (got {width})"),
            });
        }
        let raw = lattice
            .omegas()
            .into_iter()
            .map(|w| {
                let x = (w - center) / (std::f64::consts::SQRT_2 * width);
                hermite(order, x) * (-x * x / 2.0).exp()
            })
            .collect();
        Self::normalized(lattice, raw)
    }

    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    /// `∫đω ψ₁*(ω)ψ₂(ω)`.
    pub fn overlap(&self, other: &TemporalMode) -> Complex64 {
        let m = self.lattice.measure();
        self.psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * m
    }

    /// `E = ∫đω a(ω)ψ(ω)`.
    pub fn project(&self, field: &[Complex64]) -> Complex64 {
        let m = self.lattice.measure();
        field.iter().zip(&self.psi).map(|(a, p)| a * p).sum::<Complex64>() * m
    }
}

/// Physicists' Hermite polynomial.
fn hermite(n: u32, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Closed-form mode energy in units of `ħω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeEnergy {
    pub p_sf: f64,
    /// Value of the printed algebra chain, `P_SF·½`.
    pub printed_chain: f64,
    /// Value after the final arrow, `½`.
    pub final_arrow: f64,
    /// The two differ by a factor of 2 at `P_SF = ½`.
    pub final_arrow_disagrees: bool,
}

pub fn temporal_mode_energy(noise: &NoiseSpec, _mode: &TemporalMode) -> ModeEnergy {
    let printed_chain = 0.5 * noise.p_sf;
    ModeEnergy {
        p_sf: noise.p_sf,
        printed_chain,
        final_arrow: 0.5,
        final_arrow_disagrees: printed_chain != 0.5,
    }
}

fn ungated_context<S: Realizations + ?Sized>(src: &S) -> Result<ResultContext> {
    if src.is_gated() {
        return Err(Error::StageMismatch {
            expected: "ungated",
            actual: src.stage_name(),
        });
    }
    Ok(ResultContext::new(*src.lattice()).with_p_sf(src.noise().p_sf))
}

/// `½⟨|E|²⟩` estimated over realizations.
pub fn temporal_mode_energy_mc<S: Realizations + ?Sized>(src: &S, mode: &TemporalMode) -> Result<ScalarResult> {
    let ctx = ungated_context(src)?;
    if mode.lattice != *src.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let samples = collect_rows(src, |a| vec![0.5 * mode.project(a).norm_sqr()]);
    Ok(ScalarResult::monte_carlo(vec![()], samples, ctx))
}

/// `⟨E₁E₂*⟩` for two modes.
pub fn mode_covariance_mc<S: Realizations + ?Sized>(
    src: &S,
    first: &TemporalMode,
    second: &TemporalMode,
) -> Result<ProbeResult<(), Complex64>> {
    let ctx = ungated_context(src)?;
    if first.lattice != *src.lattice() || second.lattice != *src.lattice() {
        return Err(Error::LatticeMismatch);
    }
    let samples = collect_rows(src, |a| vec![first.project(a) * second.project(a).conj()]);
    Ok(ProbeResult::monte_carlo(vec![()], samples, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> FrequencyLattice {
        FrequencyLattice::new(20.0, 5.0, 201).unwrap()
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(1, 0.3), 0.6);
        assert!((hermite(2, 0.3) - (4.0 * 0.09 - 2.0)).abs() < 1e-15);
        assert!((hermite(3, 0.5) - (8.0 * 0.125 - 12.0 * 0.5)).abs() < 1e-14);
    }

    #[test]
    fn modes_are_orthonormal() {
        let g = TemporalMode::gaussian(lattice(), 20.0, 0.5).unwrap();
        let h = TemporalMode::hermite_gaussian(lattice(), 20.0, 0.5, 1).unwrap();
        assert!((g.overlap(&g).re - 1.0).abs() < 1e-12);
        assert!((h.overlap(&h).re - 1.0).abs() < 1e-12);
        assert!(g.overlap(&h).norm() < 1e-14);
    }

    #[test]
    fn bad_modes_are_rejected() {
        let lat = lattice();
        assert!(matches!(
            TemporalMode::new(lat, vec![Complex64::new(1.0, 0.0); 201]),
            Err(Error::ModeNotNormalized { .. })
        ));
        assert!(matches!(
            TemporalMode::gaussian(lat, 24.0, 0.5),
            Err(Error::ModeLeak { .. })
        ));
    }

    #[test]
    fn closed_form_flags_the_final_arrow() {
        let m = TemporalMode::gaussian(lattice(), 20.0, 0.5).unwrap();
        let e = temporal_mode_energy(&NoiseSpec::default(), &m);
        assert_eq!(e.printed_chain, 0.25);
        assert_eq!(e.final_arrow, 0.5);
        assert!(e.final_arrow_disagrees);
    }
}
