//! Quantum-theory closed forms for the gated squeezed vacuum.

use num_complex::Complex64;

use crate::correlator::{
    Corr2Result, Corr4Tensor, Provenance, ResultContext, TermBreakdown, Xi,
};
use crate::error::{Error, Result};
use crate::gain::GainProfile;
use crate::gate::GateKernel;
use crate::numeric::compensated_sum;
use crate::quads::Quad;

/// A four-frequency correlator available in closed form, split into its
/// paired and accidental terms.
pub trait Corr4Source: Sync {
    fn terms(&self, q: Quad) -> (Complex64, Complex64);

    fn value(&self, q: Quad) -> Complex64 {
        let (a, b) = self.terms(q);
        a + b
    }
}

pub(crate) fn check_same_lattice(gain: &GainProfile, kernel: &GateKernel) -> Result<()> {
    if gain.lattice != *kernel.lattice() {
        return Err(Error::LatticeMismatch);
    }
    Ok(())
}

/// `S_QT(ω) = |g(ω)|²`.
pub fn spectrum_qt(gain: &GainProfile) -> Vec<f64> {
    gain.g_norm_sqr()
}

/// `⟨c†(ω)c(ω̃)⟩ = g*(ω)·g(ω̃)·D(ω−ω̃)`.
pub fn corr2_qt(
    gain: &GainProfile,
    kernel: &GateKernel,
    probes: &[(usize, usize)],
) -> Result<Corr2Result> {
    check_same_lattice(gain, kernel)?;
    let values = probes
        .iter()
        .map(|&(j, k)| gain.g[j].conj() * gain.g[k] * kernel.d(j, k))
        .collect();
    Ok(Corr2Result::closed_form(
        probes.to_vec(),
        values,
        None,
        Provenance::QtClosedForm,
        ResultContext::new(gain.lattice).gated(kernel.duration()),
    ))
}

/// Mean photon number in the gate, `N_QT = T ∫ dω/2π |g(ω)|²`.
pub fn photon_number_qt(gain: &GainProfile, kernel: &GateKernel) -> Result<f64> {
    check_same_lattice(gain, kernel)?;
    let s = gain.g_norm_sqr();
    if !gain.is_vacuum() {
        gain.lattice.check_edges(&s, "photon_number_qt");
    }
    let sum = compensated_sum(s.iter().copied());
    Ok(kernel.duration() * sum * gain.lattice.measure())
}

/// Coherent plus incoherent quantum correlator.
pub struct QtCorr4<'a> {
    pub gain: &'a GainProfile,
    pub kernel: &'a GateKernel,
    pub xi: Xi,
}

impl<'a> QtCorr4<'a> {
    pub fn new(gain: &'a GainProfile, kernel: &'a GateKernel, xi: Xi) -> Result<Self> {
        check_same_lattice(gain, kernel)?;
        Ok(Self { gain, kernel, xi })
    }
}

impl Corr4Source for QtCorr4<'_> {
    fn terms(&self, q: Quad) -> (Complex64, Complex64) {
        let (f, g, k) = (&self.gain.f, &self.gain.g, self.kernel);
        let coherent = g[q.a].conj() * f[q.a].conj() * f[q.c] * g[q.c]
            * (k.d_anti(q.a, q.b) * k.d_anti(q.d, q.c));
        let pairs = k.d(q.b, q.c) * k.d(q.a, q.d) + self.xi.value() * k.d(q.a, q.c) * k.d(q.b, q.d);
        let incoherent = g[q.a].norm_sqr() * g[q.b].norm_sqr() * pairs;
        (coherent, Complex64::new(incoherent, 0.0))
    }
}

/// Evaluates any closed-form source at `quads` with the per-term breakdown.
pub fn evaluate_corr4(
    source: &dyn Corr4Source,
    quads: &[Quad],
    provenance: Provenance,
    context: ResultContext,
) -> Corr4Tensor {
    let (coherent, incoherent): (Vec<_>, Vec<_>) = quads.iter().map(|&q| source.terms(q)).unzip();
    let values = coherent.iter().zip(&incoherent).map(|(a, b)| a + b).collect();
    Corr4Tensor::closed_form(
        quads.to_vec(),
        values,
        Some(TermBreakdown {
            coherent,
            incoherent,
        }),
        provenance,
        context,
    )
}

/// `⟨c†(ω_a)c†(ω_b)c(ω_c)c(ω_d)⟩ = C_coh + C_incoh`.
pub fn corr4_qt(
    gain: &GainProfile,
    kernel: &GateKernel,
    quads: &[Quad],
    xi: Xi,
) -> Result<Corr4Tensor> {
    let source = QtCorr4::new(gain, kernel, xi)?;
    Ok(evaluate_corr4(
        &source,
        quads,
        Provenance::QtClosedForm,
        ResultContext::new(gain.lattice)
            .gated(kernel.duration())
            .with_xi(xi),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::{gain_profile, GainParams};
    use crate::lattice::FrequencyLattice;
    use approx::assert_relative_eq;

    fn setup(gamma: f64) -> (GainProfile, GateKernel) {
        let lat = FrequencyLattice::new(40.0, 6.0, 241).unwrap();
        let gain = gain_profile(&lat, &GainParams::new(gamma, 1.0, 1.0).compensated(true)).unwrap();
        (gain, GateKernel::new(20.0, lat).unwrap())
    }

    #[test]
    fn spectrum_examples() {
        let (gain, _) = setup(1.0);
        let s = spectrum_qt(&gain);
        let c = gain.lattice.center_index();
        assert_relative_eq!(s[c], 1.381_097_845_541_815_5, epsilon = 1e-13);
        assert_eq!(s[10], s[gain.lattice.mirror_index(10)]);
        let (vac, _) = setup(0.0);
        assert!(spectrum_qt(&vac).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn corr2_examples() {
        let (gain, kernel) = setup(1.0);
        let c = gain.lattice.center_index();
        let r = corr2_qt(&gain, &kernel, &[(c, c), (c, c + 5), (c + 5, c)]).unwrap();
        assert_relative_eq!(r.values[0].re, 1.381_097_845_541_815_5 * 20.0, epsilon = 1e-11);
        assert_eq!(r.values[1], r.values[2].conj());
        // |ω−ω̃|T/2 = π at offset 2π/(T dω) = 6.28 steps: not on the lattice, use an explicit kernel
        let lat = gain.lattice;
        let k2 = GateKernel::new(2.0 * std::f64::consts::PI / (4.0 * lat.d_omega()), lat).unwrap();
        let r = corr2_qt(&gain, &k2, &[(c, c + 4)]).unwrap();
        assert!(r.values[0].norm() < 1e-12);
        let vac = GainProfile::vacuum(lat);
        assert_eq!(corr2_qt(&vac, &kernel, &[(c, c)]).unwrap().values[0].norm(), 0.0);
    }

    #[test]
    fn photon_number_rectangular_profile() {
        let lat = FrequencyLattice::new(40.0, 6.0, 241).unwrap();
        let kernel = GateKernel::new(20.0, lat).unwrap();
        let big_g: f64 = 0.37;
        // |g|² = G over |ω−ω₀| ≤ 2 (81 points), 0 elsewhere
        let g: Vec<Complex64> = (0..241)
            .map(|k| {
                if lat.detuning(k).abs() <= 2.0 + 1e-9 {
                    Complex64::new(0.0, big_g.sqrt())
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let f = vec![Complex64::new(1.0, 0.0); 241];
        let prof = GainProfile::from_tables(lat, f, g, GainParams::new(0.0, 0.0, 1.0)).unwrap();
        let bandwidth = 81.0 * lat.d_omega();
        let n = photon_number_qt(&prof, &kernel).unwrap();
        assert_relative_eq!(n, 20.0 * big_g * bandwidth / (2.0 * std::f64::consts::PI), max_relative = 1e-13);
        assert_eq!(photon_number_qt(&GainProfile::vacuum(lat), &kernel).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_quad_value() {
        let (gain, kernel) = setup(1.0);
        let c = gain.lattice.center_index();
        let t = corr4_qt(&gain, &kernel, &[Quad::new(c, c, c, c)], Xi::Indistinguishable).unwrap();
        let terms = t.terms.as_ref().unwrap();
        let t2 = 400.0;
        assert_relative_eq!(terms.coherent[0].re, 3.288_529_104_502_060_4 * t2, max_relative = 1e-12);
        assert_relative_eq!(terms.incoherent[0].re, 3.814_862_517_920_489 * t2, max_relative = 1e-12);
        assert_relative_eq!(t.values[0].re, 7.103_391_622_422_549 * t2, max_relative = 1e-12);
    }

    #[test]
    fn vacuum_correlator_vanishes() {
        let lat = FrequencyLattice::new(40.0, 6.0, 241).unwrap();
        let kernel = GateKernel::new(20.0, lat).unwrap();
        let vac = GainProfile::vacuum(lat);
        let qs = [Quad::new(100, 140, 120, 121), Quad::new(120, 120, 120, 120)];
        let t = corr4_qt(&vac, &kernel, &qs, Xi::Indistinguishable).unwrap();
        assert!(t.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn distinguishable_drops_exchange_pairing() {
        let (gain, kernel) = setup(1.0);
        let q = Quad::new(118, 122, 118, 122);
        let one = corr4_qt(&gain, &kernel, &[q], Xi::Indistinguishable).unwrap();
        let zero = corr4_qt(&gain, &kernel, &[q], Xi::Distinguishable).unwrap();
        let ga = gain.g[118].norm_sqr();
        let gb = gain.g[122].norm_sqr();
        let diff = one.terms.unwrap().incoherent[0] - zero.terms.unwrap().incoherent[0];
        assert_relative_eq!(diff.re, ga * gb * 400.0, max_relative = 1e-12);
    }

    #[test]
    fn lattice_mismatch_is_rejected() {
        let (gain, _) = setup(1.0);
        let other = GateKernel::new(20.0, FrequencyLattice::new(40.0, 6.0, 243).unwrap()).unwrap();
        assert!(matches!(
            corr4_qt(&gain, &other, &[], Xi::Indistinguishable),
            Err(Error::LatticeMismatch)
        ));
    }
}
