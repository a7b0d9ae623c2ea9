//! Stochastic-field closed forms from the complex Gaussian moment theorem.

use num_complex::Complex64;

use crate::correlator::{Corr2Result, Corr4Tensor, Provenance, ResultContext, SpectrumResult};
use crate::error::Result;
use crate::gain::GainProfile;
use crate::gate::GateKernel;
use crate::numeric::DoubleF64;
use crate::qt_engine::{check_same_lattice, evaluate_corr4, Corr4Source};
use crate::quads::Quad;

/// `S_SF(ω) = P_SF(2|g(ω)|² + 1)`.
pub fn spectrum_sf_closed(gain: &GainProfile, p_sf: f64) -> SpectrumResult {
    let values = gain
        .g
        .iter()
        .map(|g| p_sf * (2.0 * g.norm_sqr() + 1.0))
        .collect();
    SpectrumResult::closed_form(
        (0..gain.lattice.len()).collect(),
        values,
        None,
        Provenance::SfClosedForm,
        ResultContext::new(gain.lattice).with_p_sf(p_sf),
    )
}

/// `⟨c*(ω)c(ω̃)⟩ = P_SF(f*(ω)f(ω̃) + g*(ω)g(ω̃))·D(ω−ω̃)`.
pub fn corr2_sf_closed(
    gain: &GainProfile,
    kernel: &GateKernel,
    probes: &[(usize, usize)],
    p_sf: f64,
) -> Result<Corr2Result> {
    check_same_lattice(gain, kernel)?;
    let (f, g) = (&gain.f, &gain.g);
    let values = probes
        .iter()
        .map(|&(j, k)| p_sf * (f[j].conj() * f[k] + g[j].conj() * g[k]) * kernel.d(j, k))
        .collect();
    Ok(Corr2Result::closed_form(
        probes.to_vec(),
        values,
        None,
        Provenance::SfClosedForm,
        ResultContext::new(gain.lattice)
            .gated(kernel.duration())
            .with_p_sf(p_sf),
    ))
}

/// `N_SF = T ∫đω P_SF(2|g|² + 1)` in double-f64, so that the `O(|g|²)` part
/// survives subtraction of the vacuum baseline.
pub fn energy_sf_closed(gain: &GainProfile, kernel: &GateKernel, p_sf: f64) -> Result<DoubleF64> {
    check_same_lattice(gain, kernel)?;
    let s = gain.g_norm_sqr();
    if !gain.is_vacuum() {
        gain.lattice.check_edges(&s, "energy_sf_closed");
    }
    let total = s
        .iter()
        .fold(DoubleF64::ZERO, |acc, &g2| acc + DoubleF64::sum_of(2.0 * p_sf * g2, p_sf));
    Ok(total.scale(kernel.duration() * gain.lattice.measure()))
}

/// Correlated plus uncorrelated terms exactly as printed:
/// `4P²f*_a g*_a f_c g_c·D(2ω₀−ω_a−ω_b)D(2ω₀−ω_c−ω_d)` and
/// `4P²(|g_a|²+½)(|g_b|²+½)·(D_ad D_bc + D_ac D_bd)`.
pub struct SfCorr4<'a> {
    pub gain: &'a GainProfile,
    pub kernel: &'a GateKernel,
    pub p_sf: f64,
}

impl<'a> SfCorr4<'a> {
    pub fn new(gain: &'a GainProfile, kernel: &'a GateKernel, p_sf: f64) -> Result<Self> {
        check_same_lattice(gain, kernel)?;
        Ok(Self { gain, kernel, p_sf })
    }
}

impl Corr4Source for SfCorr4<'_> {
    fn terms(&self, q: Quad) -> (Complex64, Complex64) {
        let (f, g, k) = (&self.gain.f, &self.gain.g, self.kernel);
        let p2 = 4.0 * self.p_sf * self.p_sf;
        let correlated = p2
            * g[q.a].conj()
            * f[q.a].conj()
            * f[q.c]
            * g[q.c]
            * (k.d_anti(q.a, q.b) * k.d_anti(q.c, q.d));
        let pairs = k.d(q.a, q.d) * k.d(q.b, q.c) + k.d(q.a, q.c) * k.d(q.b, q.d);
        let uncorrelated =
            p2 * (g[q.a].norm_sqr() + 0.5) * (g[q.b].norm_sqr() + 0.5) * pairs;
        (correlated, Complex64::new(uncorrelated, 0.0))
    }
}

/// The Gaussian moment theorem applied to the exact gated second moments
/// `⟨c*_j c_k⟩ = P(f*_j f_k + g*_j g_k)D(ω_j−ω_k)` and
/// `⟨c_j c_k⟩ = P(f_j g_k + g_j f_k)D(2ω₀−ω_j−ω_k)`.
///
/// Coincides with [`SfCorr4`] on quads built from one mirror pair
/// `(ω, 2ω₀−ω)` when `|f|² − |g|² = 1`. Elsewhere it is the value a Monte
/// Carlo estimate converges to.
pub struct SfMomentCorr4<'a> {
    pub gain: &'a GainProfile,
    pub kernel: &'a GateKernel,
    pub p_sf: f64,
}

impl<'a> SfMomentCorr4<'a> {
    pub fn new(gain: &'a GainProfile, kernel: &'a GateKernel, p_sf: f64) -> Result<Self> {
        check_same_lattice(gain, kernel)?;
        Ok(Self { gain, kernel, p_sf })
    }

    fn normal(&self, j: usize, k: usize) -> Complex64 {
        let (f, g) = (&self.gain.f, &self.gain.g);
        self.p_sf * (f[j].conj() * f[k] + g[j].conj() * g[k]) * self.kernel.d(j, k)
    }

    fn anomalous(&self, j: usize, k: usize) -> Complex64 {
        let (f, g) = (&self.gain.f, &self.gain.g);
        self.p_sf * (f[j] * g[k] + g[j] * f[k]) * self.kernel.d_anti(j, k)
    }
}

impl Corr4Source for SfMomentCorr4<'_> {
    fn terms(&self, q: Quad) -> (Complex64, Complex64) {
        let correlated = self.anomalous(q.a, q.b).conj() * self.anomalous(q.c, q.d);
        let uncorrelated = self.normal(q.a, q.c) * self.normal(q.b, q.d)
            + self.normal(q.a, q.d) * self.normal(q.b, q.c);
        (correlated, uncorrelated)
    }
}

/// A closed-form source minus the same source at `g = 0`.
pub struct RenormalizedSfCorr4<'a> {
    gain: &'a GainProfile,
    baseline: GainProfile,
    kernel: &'a GateKernel,
    p_sf: f64,
}

impl<'a> RenormalizedSfCorr4<'a> {
    pub fn new(gain: &'a GainProfile, kernel: &'a GateKernel, p_sf: f64) -> Result<Self> {
        check_same_lattice(gain, kernel)?;
        Ok(Self {
            gain,
            baseline: GainProfile::vacuum(gain.lattice),
            kernel,
            p_sf,
        })
    }
}

impl Corr4Source for RenormalizedSfCorr4<'_> {
    fn terms(&self, q: Quad) -> (Complex64, Complex64) {
        let with_g = SfCorr4 {
            gain: self.gain,
            kernel: self.kernel,
            p_sf: self.p_sf,
        }
        .terms(q);
        let without = SfCorr4 {
            gain: &self.baseline,
            kernel: self.kernel,
            p_sf: self.p_sf,
        }
        .terms(q);
        (with_g.0 - without.0, with_g.1 - without.1)
    }
}

/// What the renormalized printed classical correlator has beyond the quantum
/// one at `P_SF = ½`, `ξ = 1`: `½(|g_a|²+|g_b|²)·(D_ad D_bc + D_ac D_bd)`.
pub fn identity_residual(gain: &GainProfile, kernel: &GateKernel, q: Quad) -> f64 {
    let k = kernel;
    let pairs = k.d(q.a, q.d) * k.d(q.b, q.c) + k.d(q.a, q.c) * k.d(q.b, q.d);
    0.5 * (gain.g[q.a].norm_sqr() + gain.g[q.b].norm_sqr()) * pairs
}

/// [`identity_residual`] as a correlator, carried in the uncorrelated slot.
pub struct IdentityResidual<'a> {
    pub gain: &'a GainProfile,
    pub kernel: &'a GateKernel,
}

impl Corr4Source for IdentityResidual<'_> {
    fn terms(&self, q: Quad) -> (Complex64, Complex64) {
        (
            Complex64::new(0.0, 0.0),
            Complex64::new(identity_residual(self.gain, self.kernel, q), 0.0),
        )
    }
}

fn sf_context(gain: &GainProfile, kernel: &GateKernel, p_sf: f64) -> ResultContext {
    ResultContext::new(gain.lattice)
        .gated(kernel.duration())
        .with_p_sf(p_sf)
}

pub fn corr4_sf_closed(
    gain: &GainProfile,
    kernel: &GateKernel,
    quads: &[Quad],
    p_sf: f64,
) -> Result<Corr4Tensor> {
    let source = SfCorr4::new(gain, kernel, p_sf)?;
    Ok(evaluate_corr4(
        &source,
        quads,
        Provenance::SfClosedForm,
        sf_context(gain, kernel, p_sf),
    ))
}

pub fn corr4_sf_moment_theorem(
    gain: &GainProfile,
    kernel: &GateKernel,
    quads: &[Quad],
    p_sf: f64,
) -> Result<Corr4Tensor> {
    let source = SfMomentCorr4::new(gain, kernel, p_sf)?;
    Ok(evaluate_corr4(
        &source,
        quads,
        Provenance::SfClosedForm,
        sf_context(gain, kernel, p_sf),
    ))
}
