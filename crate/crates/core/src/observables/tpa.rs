//! Two-photon absorption probability
//! `P = ∫đω′∫đω∫đω̃ K(ω′,ω,ω̃)·C⁽⁴⁾(ω′, ω+ω̃−ω′, ω, ω̃)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::correlator::{ResultContext, ScalarResult, Xi};
use crate::error::{Error, Result};
use crate::gain::{gain_profile, GainParams};
use crate::gate::GateKernel;
use crate::lattice::FrequencyLattice;
use crate::numeric::log_log_slope;
use crate::observables::real_part;
use crate::qt_engine::{photon_number_qt, Corr4Source, QtCorr4};
use crate::quads::Quad;
use crate::sf_engine::estimate::{collect_rows, moment_scale};
use crate::sf_engine::Realizations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelNormalization {
    /// Unit area in the sum frequency: `(σ_f/π)/((Ω−ω_f)² + σ_f²)`.
    #[default]
    Area,
    /// Unit peak: `σ_f²/((Ω−ω_f)² + σ_f²)`.
    Peak,
}

/// Lorentzian final-state response in the sum frequency `Ω = ω + ω̃`, with
/// no dependence on `ω′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TpaKernel {
    pub omega_f: f64,
    pub sigma_f: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
    #[serde(default)]
    pub normalization: KernelNormalization,
}

fn unit() -> f64 {
    1.0
}

impl TpaKernel {
    /// Resonant with degenerate pairs: `ω_f = 2ω₀`.
    pub fn resonant(lattice: &FrequencyLattice, sigma_f: f64) -> Self {
        Self {
            omega_f: 2.0 * lattice.omega0(),
            sigma_f,
            amplitude: 1.0,
            normalization: KernelNormalization::Area,
        }
    }

    pub fn with_normalization(mut self, normalization: KernelNormalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn validate(&self, lattice: &FrequencyLattice) -> Result<()> {
        if !(self.sigma_f > 0.0) || !self.sigma_f.is_finite() {
            return Err(Error::InvalidParameter {
                field: "sigma_f",
                reason: format!("linewidth must be positive (got {})", self.sigma_f),
            });
        }
        if self.sigma_f < 3.0 * lattice.d_omega() {
            return Err(Error::UnderResolved(format!(
                "sigma_f = {} is below 3·d_omega = {}",
                self.sigma_f,
                3.0 * lattice.d_omega()
            )));
        }
        Ok(())
    }

    pub fn value(&self, sum_frequency: f64) -> f64 {
        let x = sum_frequency - self.omega_f;
        let s2 = self.sigma_f * self.sigma_f;
        let shape = match self.normalization {
            KernelNormalization::Area => self.sigma_f / PI / (x * x + s2),
            KernelNormalization::Peak => s2 / (x * x + s2),
        };
        self.amplitude * shape
    }

    /// Kernel at `ω_j + ω_k`, indexed by `j + k`.
    fn table(&self, lattice: &FrequencyLattice) -> Vec<f64> {
        let c = lattice.center_index() as i64;
        (0..2 * lattice.len() as i64 - 1)
            .map(|n| self.value(2.0 * lattice.omega0() + (n - 2 * c) as f64 * lattice.d_omega()))
            .collect()
    }
}

/// TPA probability and its split by correlator term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TpaProbability {
    pub total: f64,
    pub coherent: f64,
    pub incoherent: f64,
}

/// Triple lattice quadrature over any closed-form correlator. Quads whose
/// `ω_b` falls outside the band contribute nothing.
pub fn tpa_probability(
    source: &dyn Corr4Source,
    lattice: &FrequencyLattice,
    kernel: &TpaKernel,
) -> Result<TpaProbability> {
    kernel.validate(lattice)?;
    let k_table = kernel.table(lattice);
    let n = lattice.len();
    let partial: Vec<(Complex64, Complex64, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut coh = Complex64::new(0.0, 0.0);
            let mut incoh = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for k in 0..n {
                let kv = k_table[j + k];
                for i in 0..n {
                    let Some(b) = lattice.sum_partner(j, k, i) else {
                        continue;
                    };
                    let (a, c) = source.terms(Quad::new(i, b, j, k));
                    coh += kv * a;
                    incoh += kv * c;
                    scale += kv * (a.norm() + c.norm());
                }
            }
            (coh, incoh, scale)
        })
        .collect();
    let (mut coh, mut incoh, mut scale) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    for (a, c, s) in partial {
        coh += a;
        incoh += c;
        scale += s;
    }
    let m3 = lattice.measure().powi(3);
    let coherent = real_part(coh * m3, scale * m3, "tpa coherent term")?;
    let incoherent = real_part(incoh * m3, scale * m3, "tpa incoherent term")?;
    Ok(TpaProbability {
        total: coherent + incoherent,
        coherent,
        incoherent,
    })
}

/// Per-realization `m³ Σ_n K(n)|Y_n|²` with `Y_n = Σ_{i+j=n} c_i c_j`, which
/// is the triple quadrature of the realization's own fourth moment.
pub fn tpa_probability_mc<S: Realizations + ?Sized>(src: &S, kernel: &TpaKernel) -> Result<ScalarResult> {
    let lattice = *src.lattice();
    kernel.validate(&lattice)?;
    let k_table = kernel.table(&lattice);
    let norm = lattice.measure().powi(3) / moment_scale(src, 2);
    let n = lattice.len();
    let samples = collect_rows(src, |c| {
        let mut y = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
        for i in 0..n {
            for j in 0..n {
                y[i + j] += c[i] * c[j];
            }
        }
        let p: f64 = y.iter().zip(&k_table).map(|(v, k)| k * v.norm_sqr()).sum();
        vec![norm * p]
    });
    let mut ctx = ResultContext::new(lattice).with_p_sf(src.noise().p_sf);
    if let Some(t) = src.gate_duration() {
        ctx = ctx.gated(t);
    }
    Ok(ScalarResult::monte_carlo(vec![()], samples, ctx))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxRow {
    pub gamma: f64,
    pub photon_number: f64,
    pub p_coherent: f64,
    pub p_incoherent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxSweep {
    pub rows: Vec<FluxRow>,
    pub slope_coherent: f64,
    pub slope_incoherent: f64,
}

/// Quantum TPA per gain value in the low-gain regime, with log-log slopes of
/// each term against the photon number.
pub fn flux_scaling_sweep(
    gammas: &[f64],
    template: &GainParams,
    gate: &GateKernel,
    tpa: &TpaKernel,
    xi: Xi,
) -> Result<FluxSweep> {
    let (lo, hi) = gammas
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
    if gammas.len() < 2 || !(lo > 0.0) || hi / lo < 100.0 {
        return Err(Error::InvalidParameter {
            field: "gamma_values",
            reason: "need positive gains spanning at least two decades".into(),
        });
    }
    if (hi * template.z).sinh().powi(2) > 1e-2 {
        return Err(Error::InvalidParameter {
            field: "gamma_values",
            reason: format!("sinh²(γz) = {:.3e} leaves the low-gain regime", (hi * template.z).sinh().powi(2)),
        });
    }
    let lattice = *gate.lattice();
    let rows = gammas
        .iter()
        .map(|&gamma| {
            let gain = gain_profile(&lattice, &GainParams { gamma, ..*template })?;
            let p = tpa_probability(&QtCorr4::new(&gain, gate, xi)?, &lattice, tpa)?;
            Ok(FluxRow {
                gamma,
                photon_number: photon_number_qt(&gain, gate)?,
                p_coherent: p.coherent,
                p_incoherent: p.incoherent,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n: Vec<f64> = rows.iter().map(|r| r.photon_number).collect();
    let coh: Vec<f64> = rows.iter().map(|r| r.p_coherent).collect();
    let incoh: Vec<f64> = rows.iter().map(|r| r.p_incoherent).collect();
    Ok(FluxSweep {
        slope_coherent: log_log_slope(&n, &coh),
        slope_incoherent: log_log_slope(&n, &incoh),
        rows,
    })
}
