//! Sum-frequency generation driven by the squeezed field:
//! `S₃(ω₃) = ξ² ∫đω∫đω̃ Φ*(ω, ω₃−ω)Φ(ω̃, ω₃−ω̃)·C⁽⁴⁾(ω, ω₃−ω, ω̃, ω₃−ω̃)`.
//!
//! Output frequencies are `ω₃ = 2ω₀ + q·dω` for integer offsets `q`, so every
//! partner `ω₃ − ω` is a lattice point. Values are in relative units.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::correlator::{ProbeResult, Provenance, ResultContext, TermBreakdown, Xi};
use crate::error::{Error, Result};
use crate::gain::GainProfile;
use crate::gate::GateKernel;
use crate::lattice::FrequencyLattice;
use crate::numeric::sinc;
use crate::observables::real_part;
use crate::qt_engine::{Corr4Source, QtCorr4};
use crate::quads::Quad;
use crate::sf_engine::estimate::{collect_rows, moment_scale};
use crate::sf_engine::Realizations;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfgParams {
    /// Group-velocity dispersion `k″` at `ω₀`.
    pub k2prime: f64,
    /// Crystal length.
    pub length: f64,
    /// Free overall coupling.
    #[serde(default = "unit")]
    pub xi_c: f64,
}

fn unit() -> f64 {
    1.0
}

impl SfgParams {
    pub fn validate(&self, lattice: &FrequencyLattice) -> Result<()> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidParameter {
                field: "length",
                reason: format!("crystal length must be positive (got {})", self.length),
            });
        }
        // largest phase step of Φ between neighbouring grid points
        let step = lattice.d_omega() * (self.k2prime * self.length / 2.0).abs() * 2.0 * lattice.half_width();
        if step > PI / 4.0 {
            return Err(Error::UnderResolved(format!(
                "phase-matching phase advances {step:.3} rad per grid step (limit π/4)"
            )));
        }
        Ok(())
    }
}

/// `Φ(ω₁, ω₃−ω₁) = sinc[(k″L/2)(ω₁−ω₀)(ω₃−ω₁−ω₀)]`.
pub fn sfg_phase_matching(lattice: &FrequencyLattice, params: &SfgParams, omega1: f64, omega3: f64) -> f64 {
    let w0 = lattice.omega0();
    sinc(params.k2prime * params.length / 2.0 * (omega1 - w0) * (omega3 - omega1 - w0))
}

/// Per-offset spectrum; probes are the offsets `q`.
pub type SfgSpectrum = ProbeResult<i64, f64>;

/// In-band `(i, partner, Φ)` triples for output offset `q`.
fn pairs(lattice: &FrequencyLattice, params: &SfgParams, q: i64) -> Vec<(usize, usize, f64)> {
    let c = lattice.center_index() as i64;
    let dw = lattice.d_omega();
    let coef = params.k2prime * params.length / 2.0;
    (0..lattice.len())
        .filter_map(|i| {
            let p = lattice.sum_frequency_partner(q, i)?;
            let d1 = (i as i64 - c) as f64 * dw;
            let d2 = (q - (i as i64 - c)) as f64 * dw;
            Some((i, p, sinc(coef * d1 * d2)))
        })
        .collect()
}

/// Double lattice quadrature of any closed-form correlator.
pub fn sfg_spectrum(
    source: &dyn Corr4Source,
    lattice: &FrequencyLattice,
    params: &SfgParams,
    offsets: &[i64],
    context: ResultContext,
    provenance: Provenance,
) -> Result<SfgSpectrum> {
    params.validate(lattice)?;
    let norm = params.xi_c * params.xi_c * lattice.measure().powi(2);
    let per_q: Vec<Result<(f64, f64)>> = offsets
        .par_iter()
        .map(|&q| {
            let ps = pairs(lattice, params, q);
            let mut coh = Complex64::new(0.0, 0.0);
            let mut incoh = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for &(i, pi, phi_i) in &ps {
                for &(k, pk, phi_k) in &ps {
                    let (a, b) = source.terms(Quad::new(i, pi, k, pk));
                    let w = phi_i * phi_k;
                    coh += w * a;
                    incoh += w * b;
                    scale += w.abs() * (a.norm() + b.norm());
                }
            }
            Ok((
                real_part(coh * norm, scale * norm, "sfg coherent term")?,
                real_part(incoh * norm, scale * norm, "sfg incoherent term")?,
            ))
        })
        .collect();
    let (coherent, incoherent): (Vec<f64>, Vec<f64>) = per_q.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let values = coherent.iter().zip(&incoherent).map(|(a, b)| a + b).collect();
    Ok(SfgSpectrum::closed_form(
        offsets.to_vec(),
        values,
        Some(TermBreakdown {
            coherent,
            incoherent,
        }),
        provenance,
        context,
    ))
}

pub fn sfg_spectrum_qt(
    gain: &GainProfile,
    kernel: &GateKernel,
    params: &SfgParams,
    offsets: &[i64],
    xi: Xi,
) -> Result<SfgSpectrum> {
    let source = QtCorr4::new(gain, kernel, xi)?;
    sfg_spectrum(
        &source,
        &gain.lattice,
        params,
        offsets,
        ResultContext::new(gain.lattice)
            .gated(kernel.duration())
            .with_xi(xi),
        Provenance::QtClosedForm,
    )
}

/// Per realization `a₃(ω₃) = ξ ∫đω₁ Φ(ω₁, ω₃−ω₁) c(ω₁)c(ω₃−ω₁)`, then `⟨|a₃|²⟩`.
pub fn sfg_spectrum_sf<S: Realizations + ?Sized>(
    src: &S,
    params: &SfgParams,
    offsets: &[i64],
) -> Result<SfgSpectrum> {
    let lattice = *src.lattice();
    params.validate(&lattice)?;
    let tables: Vec<Vec<(usize, usize, f64)>> = offsets.iter().map(|&q| pairs(&lattice, params, q)).collect();
    let amp = params.xi_c * lattice.measure();
    let scale = moment_scale(src, 2);
    let samples = collect_rows(src, |c| {
        tables
            .iter()
            .map(|ps| {
                let a3: Complex64 = ps.iter().map(|&(i, p, phi)| phi * c[i] * c[p]).sum();
                (amp * a3).norm_sqr() / scale
            })
            .collect()
    });
    let mut ctx = ResultContext::new(lattice).with_p_sf(src.noise().p_sf);
    if let Some(t) = src.gate_duration() {
        ctx = ctx.gated(t);
    }
    Ok(SfgSpectrum::monte_carlo(offsets.to_vec(), samples, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::{gain_profile, GainParams};

    #[test]
    fn phase_matching_examples() {
        let lat = FrequencyLattice::new(10.0, 2.0, 41).unwrap();
        let p = SfgParams {
            k2prime: 2.0,
            length: 1.0,
            xi_c: 1.0,
        };
        assert_eq!(sfg_phase_matching(&lat, &p, 10.0, 21.3), 1.0);
        // (k″L/2)(ω₁−ω₀)(ω₃−ω₁−ω₀) = 1·1·π
        assert!(sfg_phase_matching(&lat, &p, 11.0, 21.0 + PI).abs() < 1e-15);
        assert!((sfg_phase_matching(&lat, &p, 11.0, 22.0) - 1.0f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let lat = FrequencyLattice::new(10.0, 5.0, 21).unwrap();
        let p = SfgParams {
            k2prime: 1.0,
            length: 1.0,
            xi_c: 1.0,
        };
        assert!(matches!(p.validate(&lat), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn symmetric_and_vanishing_for_vacuum() {
        let lat = FrequencyLattice::new(30.0, 5.0, 101).unwrap();
        let gate = GateKernel::new(15.0, lat).unwrap();
        let params = SfgParams {
            k2prime: 0.2,
            length: 1.0,
            xi_c: 1.0,
        };
        let offsets: Vec<i64> = (-10..=10).collect();
        let gain = gain_profile(&lat, &GainParams::new(1.0, 1.0, 1.0).compensated(true)).unwrap();
        let s = sfg_spectrum_qt(&gain, &gate, &params, &offsets, Xi::Indistinguishable).unwrap();
        for i in 0..offsets.len() {
            let j = offsets.len() - 1 - i;
            assert!((s.values[i] - s.values[j]).abs() <= 1e-12 * s.values[i].abs());
        }
        let peak = s.values.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(s.values[10], peak);
        let vac = sfg_spectrum_qt(&GainProfile::vacuum(lat), &gate, &params, &offsets, Xi::Indistinguishable).unwrap();
        assert!(vac.values.iter().all(|&v| v == 0.0));
    }
}
