//! The acceptance criteria, each a self-contained numerical experiment with
//! pinned parameters. Shared by the `validate-all` experiment and the
//! acceptance test target.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::correlator::Xi;
use crate::error::Result;
use crate::gain::{
    bogoliubov_deviation, gain_profile, high_gain_asymptote, high_gain_exponent, low_gain_g,
    GainConvention, GainParams, GainProfile,
};
use crate::gate::GateKernel;
use crate::lattice::FrequencyLattice;
use crate::numeric::DoubleF64;
use crate::observables::{
    flux_scaling_sweep, mode_covariance_mc, sfg_spectrum, sfg_spectrum_qt, sfg_spectrum_sf,
    temporal_mode_energy, temporal_mode_energy_mc, SfgParams, TemporalMode, TpaKernel,
};
use crate::qt_engine::{corr4_qt, photon_number_qt, spectrum_qt, Corr4Source, QtCorr4};
use crate::quads::{generate, Quad, QuadFamily};
use crate::sf_engine::estimate::collect_rows;
use crate::sf_engine::{
    corr4_sf_closed, corr4_sf_mc, corr4_sf_moment_theorem, energy_sf_closed, identity_residual,
    renormalize, renormalize_energy, spectrum_sf_closed, spectrum_sf_mc, EnsemblePlan,
    IdentityResidual, NoiseSpec, RenormalizedSfCorr4,
};
use crate::correlator::{Provenance, ResultContext};

pub const N_SIGMA: f64 = 5.0;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CriterionReport {
    fn new(id: u32, name: &str) -> Self {
        Self {
            id,
            name: name.to_string(),
            passed: true,
            metrics: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn metric(&mut self, key: impl Into<String>, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.notes.push(format!("failed: {}", what.into()));
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2}  {:<36} {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// `|obs − exp| / max(|obs|, |exp|)`, zero when both vanish.
pub fn relative_error(obs: Complex64, expect: Complex64) -> f64 {
    let scale = obs.norm().max(expect.norm()).max(1e-300);
    (obs - expect).norm() / scale
}

fn standard(gamma: f64, duration: f64, half_width: f64, n_points: usize) -> Result<(GainProfile, GateKernel)> {
    let lat = FrequencyLattice::new(40.0, half_width, n_points)?;
    let gain = gain_profile(&lat, &GainParams::new(gamma, 1.0, 1.0).compensated(true))?;
    Ok((gain, GateKernel::new(duration, lat)?))
}

fn family_quads(gain: &GainProfile, kernel: &GateKernel, fraction: f64, count: usize, seed: u64) -> Vec<(QuadFamily, Quad)> {
    let support = gain.support(fraction);
    QuadFamily::ALL
        .iter()
        .flat_map(|&fam| {
            generate(fam, count, &support, kernel, seed)
                .into_iter()
                .map(move |q| (fam, q))
        })
        .collect()
}

pub fn bogoliubov_invariant() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(1, "bogoliubov invariant");
    let lat = FrequencyLattice::new(100.0, 8.0, 4097)?;
    let sets = [(1e-3, 1.0, 1.0), (1.0, 1.0, 1.0), (5.0, 1.0, 1.0), (0.5, -2.0, 2.0), (2.5, 0.25, 2.0)];
    for (gamma, kappa, z) in sets {
        let prof = gain_profile(&lat, &GainParams::new(gamma, kappa, z))?;
        let (abs, rel) = bogoliubov_deviation(&prof);
        let tag = format!("gamma={gamma},kappa={kappa},z={z}");
        r.metric(format!("unitary_abs[{tag}]"), abs);
        r.metric(format!("unitary_rel[{tag}]"), rel);
        r.check(rel <= 1e-12, format!("relative deviation {rel:.3e} at {tag}"));
    }
    let lit = gain_profile(
        &lat,
        &GainParams::new(1.0, 1.0, 1.0).with_convention(GainConvention::PaperLiteral),
    )?;
    let (abs, _) = bogoliubov_deviation(&lit);
    r.metric("paper_literal_abs[gamma=1,kappa=1,z=1]", abs);
    r.check(abs > 1e-3, format!("printed radicand deviation {abs:.3e} should exceed 1e-3"));
    r.note("asserted relative to |f|²: the absolute bound sits below f64 resolution once |f|² ~ 10⁴");
    Ok(r)
}

pub fn limit_consistency() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(2, "low/high-gain limits");
    let lat = FrequencyLattice::new(100.0, 8.0, 1601)?;
    let low = GainParams::new(1e-3, 1.0, 1.0).with_convention(GainConvention::PaperLiteral);
    let g = gain_profile(&lat, &low)?.g;
    let g_lg = low_gain_g(&lat, &low);
    let peak = g_lg[lat.center_index()].norm();
    let err = g.iter().zip(&g_lg).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / peak;
    r.metric("low_gain_rel_err", err);
    r.check(err <= 1e-4, format!("low-gain error {err:.3e}"));

    let high_err = |conv: GainConvention| -> Result<f64> {
        let p = GainParams::new(10.0, 1.0, 1.0).with_convention(conv);
        let f = gain_profile(&lat, &p)?.f;
        let (f_hg, _) = high_gain_asymptote(&lat, &p);
        let q = high_gain_exponent(&lat, &p);
        let f0 = f[lat.center_index()].norm();
        Ok((0..lat.len())
            .filter(|&k| q[k] <= 1.0)
            .map(|k| (f[k].norm() - f_hg[k].norm()).abs())
            .fold(0.0, f64::max)
            / f0)
    };
    let lit = high_err(GainConvention::PaperLiteral)?;
    let uni = high_err(GainConvention::Unitary)?;
    r.metric("high_gain_rel_err[paper_literal]", lit);
    r.metric("high_gain_rel_err[unitary]", uni);
    r.check(lit <= 1e-2, format!("high-gain error {lit:.3e}"));
    r.note("limits recorded under the printed radicand; high gain compares |f| on the quartic-exponent ≤ 1 region");
    Ok(r)
}

pub fn d_normalizations() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(3, "D-function normalizations");
    let lat = FrequencyLattice::new(100.0, 1.0, 1601)?;
    let k = GateKernel::new(400.0, lat)?;
    r.check(k.d_offset(0) == 400.0, "D(0) = T");
    let e1 = (k.integral_d() - 1.0).abs();
    let e2 = (k.integral_d_squared() - 400.0).abs();
    r.metric("int_d_err", e1);
    r.metric("int_d_bound", 2.0 * k.tail_bound_d());
    r.metric("int_d2_err", e2);
    r.metric("int_d2_bound", 2.0 * k.tail_bound_d_squared());
    r.check(e1 <= 2.0 * k.tail_bound_d(), format!("∫D error {e1:.3e}"));
    r.check(e2 <= 2.0 * k.tail_bound_d_squared(), format!("∫D² error {e2:.3e}"));
    Ok(r)
}

pub fn sampler_calibration(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(4, "gaussian sampler calibration");
    let lat = FrequencyLattice::new(40.0, 5.0, 41)?;
    let plan = EnsemblePlan::vacuum(lat, NoiseSpec::new(0.5, seed, 100_000))?;
    let probes: Vec<usize> = (0..16).map(|i| i * 40 / 15).collect();
    let samples = collect_rows(&plan, |a| {
        probes
            .iter()
            .flat_map(|&k| [Complex64::new(a[k].norm_sqr(), 0.0), a[k] * a[k]])
            .collect::<Vec<Complex64>>()
    });
    let (mean, se) = samples.estimates();
    let expect = 0.5 * lat.delta_peak();
    let mut worst_var: f64 = 0.0;
    let mut worst_pair: f64 = 0.0;
    for i in 0..probes.len() {
        worst_var = worst_var.max((mean[2 * i].re - expect).abs() / se[2 * i]);
        worst_pair = worst_pair.max(mean[2 * i + 1].norm() / se[2 * i + 1]);
    }
    r.metric("max_z_variance", worst_var);
    r.metric("max_z_unconjugated", worst_pair);
    r.check(worst_var <= N_SIGMA, "per-point variance");
    r.check(worst_pair <= N_SIGMA, "unconjugated second moment");
    Ok(r)
}

pub fn moment_theorem(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(5, "moment-theorem oracle");
    let (gain, kernel) = standard(1.0, 40.0, 6.0, 481)?;
    let quads = generate(QuadFamily::Random, 32, &gain.support(1e-2), &kernel, seed);
    let plan = EnsemblePlan::vacuum(gain.lattice, NoiseSpec::new(0.5, seed, 10_000))?
        .gated(&kernel)?
        .squeezed(&gain)?;
    let mc = corr4_sf_mc(&plan, &quads)?;
    let se = mc.stderr.clone().unwrap_or_default();
    let printed = corr4_sf_closed(&gain, &kernel, &quads, 0.5)?;
    let exact = corr4_sf_moment_theorem(&gain, &kernel, &quads, 0.5)?;
    let (mut z_printed, mut z_exact): (f64, f64) = (0.0, 0.0);
    for (i, s) in se.iter().enumerate().take(quads.len()) {
        z_printed = z_printed.max((mc.values[i] - printed.values[i]).norm() / s);
        z_exact = z_exact.max((mc.values[i] - exact.values[i]).norm() / s);
    }
    r.metric("max_z[printed]", z_printed);
    r.metric("max_z[moment_theorem]", z_exact);
    r.check(z_printed <= N_SIGMA, format!("Monte Carlo vs printed closed form, max z = {z_printed:.2}"));
    Ok(r)
}

pub fn spectrum_equivalence(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(6, "spectrum equivalence");
    let (gain, _) = standard(1.0, 40.0, 6.0, 241)?;
    let s_qt = spectrum_qt(&gain);
    let renorm = renormalize(
        &spectrum_sf_closed(&gain, 0.5),
        &spectrum_sf_closed(&GainProfile::vacuum(gain.lattice), 0.5),
    )?;
    let closed_err = renorm
        .values
        .iter()
        .zip(&s_qt)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    r.metric("closed_max_abs_err", closed_err);
    r.check(closed_err <= 1e-12, format!("closed form error {closed_err:.3e}"));

    let plan = EnsemblePlan::vacuum(gain.lattice, NoiseSpec::new(0.5, seed, 10_000))?.squeezed(&gain)?;
    let mc = renormalize(&spectrum_sf_mc(&plan)?, &spectrum_sf_mc(&plan.baseline())?)?;
    let se = mc.stderr.clone().unwrap_or_default();
    let mut worst: f64 = 0.0;
    for k in 0..s_qt.len() {
        let d = (mc.values[k] - s_qt[k]).abs();
        worst = worst.max(if se[k] > 0.0 { d / se[k] } else if d == 0.0 { 0.0 } else { f64::INFINITY });
    }
    r.metric("mc_max_z", worst);
    r.check(worst <= N_SIGMA, format!("Monte Carlo renormalized spectrum, max z = {worst:.2}"));
    Ok(r)
}

pub fn photon_number_equivalence() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(7, "photon-number equivalence");
    let lat = FrequencyLattice::new(40.0, 12.0, 2401)?;
    let kernel = GateKernel::new(40.0, lat)?;
    let base = energy_sf_closed(&GainProfile::vacuum(lat), &kernel, 0.5)?;
    for gz in [1e-2, 1.0, 5.0] {
        let gain = gain_profile(&lat, &GainParams::new(gz, 1.0, 1.0))?;
        let n_sf: DoubleF64 = energy_sf_closed(&gain, &kernel, 0.5)?;
        let diff = renormalize_energy(n_sf, base);
        let n_qt = photon_number_qt(&gain, &kernel)?;
        let rel = (diff - n_qt).abs() / n_qt.abs();
        r.metric(format!("rel_err[gamma_z={gz}]"), rel);
        r.check(rel <= 1e-12, format!("relative error {rel:.3e} at γz = {gz}"));
    }
    Ok(r)
}

/// One line of the per-quad quantum/classical comparison.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityRecord {
    pub family: QuadFamily,
    pub quad: Quad,
    pub qt_coherent: Complex64,
    pub qt_incoherent: Complex64,
    pub sf_correlated: Complex64,
    pub sf_uncorrelated_renormalized: Complex64,
    pub residual_observed: Complex64,
    pub residual_expected: f64,
    pub coherent_rel_err: f64,
    pub residual_rel_err: f64,
    /// `|residual| / |C_QT|`: how far the printed classical form is from
    /// the quantum one after renormalization.
    pub residual_fraction: f64,
}

pub fn identity_records(
    gain: &GainProfile,
    kernel: &GateKernel,
    quads: &[(QuadFamily, Quad)],
) -> Result<Vec<IdentityRecord>> {
    let qt = QtCorr4::new(gain, kernel, Xi::Indistinguishable)?;
    let sf = RenormalizedSfCorr4::new(gain, kernel, 0.5)?;
    Ok(quads
        .iter()
        .map(|&(family, quad)| {
            let (coh, incoh) = qt.terms(quad);
            let (cor, uncor) = sf.terms(quad);
            let observed = uncor - incoh;
            let expected = identity_residual(gain, kernel, quad);
            IdentityRecord {
                family,
                quad,
                qt_coherent: coh,
                qt_incoherent: incoh,
                sf_correlated: cor,
                sf_uncorrelated_renormalized: uncor,
                residual_observed: observed,
                residual_expected: expected,
                coherent_rel_err: relative_error(cor, coh),
                residual_rel_err: relative_error(observed, Complex64::new(expected, 0.0)),
                residual_fraction: expected.abs() / (coh + incoh).norm().max(1e-300),
            }
        })
        .collect())
}

pub fn four_frequency_identity(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(8, "four-frequency identity report");
    let (gain, kernel) = standard(1.0, 40.0, 6.0, 481)?;
    let quads = family_quads(&gain, &kernel, 1e-2, 32, seed);
    let records = identity_records(&gain, &kernel, &quads)?;
    let coh = records.iter().map(|x| x.coherent_rel_err).fold(0.0, f64::max);
    let res = records.iter().map(|x| x.residual_rel_err).fold(0.0, f64::max);
    let frac = records.iter().map(|x| x.residual_fraction).fold(0.0, f64::max);
    r.metric("max_coherent_rel_err", coh);
    r.metric("max_residual_rel_err", res);
    r.metric("max_residual_fraction", frac);
    r.check(coh <= 1e-12, format!("C_cor vs C_coh {coh:.3e}"));
    r.check(res <= 1e-12, format!("residual formula {res:.3e}"));
    let vanishes = records.iter().all(|x| x.residual_expected == 0.0);
    r.note(format!(
        "renormalized classical minus quantum residual {}; largest residual is {:.3} of |C_QT|",
        if vanishes { "vanishes" } else { "does not vanish" },
        frac
    ));
    Ok(r)
}

pub fn high_gain_agreement(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(9, "high-gain agreement");
    let (gain, kernel) = standard(5.0, 40.0, 6.0, 481)?;
    let support = gain.support(0.5);
    let mut quads = generate(QuadFamily::Degenerate, 32, &support, &kernel, seed);
    quads.extend(generate(QuadFamily::Ridge, 32, &support, &kernel, seed));
    let qt = corr4_qt(&gain, &kernel, &quads, Xi::Indistinguishable)?;
    let sf = corr4_sf_closed(&gain, &kernel, &quads, 0.5)?;
    let bound = 2.0 / gain.g[gain.lattice.center_index()].norm_sqr() + 1e-6;
    let worst = (0..quads.len())
        .map(|i| (sf.values[i] - qt.values[i]).norm() / qt.values[i].norm())
        .fold(0.0, f64::max);
    r.metric("max_rel_diff", worst);
    r.metric("bound", bound);
    r.check(worst <= bound, format!("relative difference {worst:.3e} > {bound:.3e}"));
    Ok(r)
}

pub fn tpa_flux_scaling() -> Result<CriterionReport> {
    let mut r = CriterionReport::new(10, "TPA flux scaling");
    let lat = FrequencyLattice::new(40.0, 6.0, 241)?;
    let gate = GateKernel::new(20.0, lat)?;
    let gammas = [1e-4, 3e-4, 1e-3, 3e-3, 1e-2];
    let sweep = flux_scaling_sweep(
        &gammas,
        &GainParams::new(1.0, 1.0, 1.0).compensated(true),
        &gate,
        &TpaKernel::resonant(&lat, 0.5),
        Xi::Indistinguishable,
    )?;
    r.metric("slope_coherent", sweep.slope_coherent);
    r.metric("slope_incoherent", sweep.slope_incoherent);
    r.check((sweep.slope_coherent - 1.0).abs() <= 0.05, "coherent slope");
    r.check((sweep.slope_incoherent - 2.0).abs() <= 0.05, "incoherent slope");
    let ratio: Vec<f64> = sweep.rows.iter().map(|x| x.p_coherent / x.p_incoherent).collect();
    r.check(ratio.windows(2).all(|w| w[1] < w[0]), "coherent/incoherent ratio falls with flux");
    Ok(r)
}

pub const SFG_OFFSETS: std::ops::RangeInclusive<i64> = -30..=30;

pub fn sfg_agreement(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(11, "SFG cross-model agreement");
    let (gain, kernel) = standard(1.0, 20.0, 6.0, 241)?;
    let lat = gain.lattice;
    let params = SfgParams {
        k2prime: 0.2,
        length: 1.0,
        xi_c: 1.0,
    };
    let offsets: Vec<i64> = SFG_OFFSETS.step_by(2).collect();
    let qt = sfg_spectrum_qt(&gain, &kernel, &params, &offsets, Xi::Indistinguishable)?;
    let residual = sfg_spectrum(
        &IdentityResidual { gain: &gain, kernel: &kernel },
        &lat,
        &params,
        &offsets,
        ResultContext::new(lat),
        Provenance::SfClosedForm,
    )?;
    let plan = EnsemblePlan::vacuum(lat, NoiseSpec::new(0.5, seed, 10_000))?
        .gated(&kernel)?
        .squeezed(&gain)?;
    let mc = renormalize(
        &sfg_spectrum_sf(&plan, &params, &offsets)?,
        &sfg_spectrum_sf(&plan.baseline(), &params, &offsets)?,
    )?;
    let se = mc.stderr.clone().unwrap_or_default();
    let n = offsets.len();
    let mut worst: f64 = 0.0;
    let mut qt_sym: f64 = 0.0;
    let mut mc_sym: f64 = 0.0;
    for i in 0..n {
        let bound = N_SIGMA * se[i] + residual.values[i].abs();
        worst = worst.max((mc.values[i] - qt.values[i]).abs() / bound);
        let j = n - 1 - i;
        qt_sym = qt_sym.max((qt.values[i] - qt.values[j]).abs() / qt.values[i].abs().max(1e-300));
        let sym_se = (se[i] * se[i] + se[j] * se[j]).sqrt();
        if sym_se > 0.0 {
            mc_sym = mc_sym.max((mc.values[i] - mc.values[j]).abs() / sym_se);
        }
    }
    r.metric("max_diff_over_bound", worst);
    r.metric("qt_symmetry_rel_err", qt_sym);
    r.metric("mc_symmetry_max_z", mc_sym);
    r.check(worst <= 1.0, "QT vs renormalized SF within 5 stderr plus residual");
    r.check(qt_sym <= 1e-12, "QT spectrum symmetric about 2ω₀");
    r.check(mc_sym <= N_SIGMA, "SF spectrum symmetric about 2ω₀");

    let vac = GainProfile::vacuum(lat);
    let qt0 = sfg_spectrum_qt(&vac, &kernel, &params, &offsets, Xi::Indistinguishable)?;
    let plan0 = EnsemblePlan::vacuum(lat, NoiseSpec::new(0.5, seed, 1_000))?
        .gated(&kernel)?
        .squeezed(&vac)?;
    let mc0 = renormalize(
        &sfg_spectrum_sf(&plan0, &params, &offsets)?,
        &sfg_spectrum_sf(&plan0.baseline(), &params, &offsets)?,
    )?;
    r.check(qt0.values.iter().all(|&v| v == 0.0), "QT spectrum vanishes for g ≡ 0");
    r.check(mc0.values.iter().all(|&v| v == 0.0), "SF spectrum vanishes for g ≡ 0");
    Ok(r)
}

pub fn mode_energy(seed: u64) -> Result<CriterionReport> {
    let mut r = CriterionReport::new(12, "temporal-mode energy");
    let lat = FrequencyLattice::new(20.0, 5.0, 201)?;
    let noise = NoiseSpec::new(0.5, seed, 100_000);
    let gauss = TemporalMode::gaussian(lat, 20.0, 0.5)?;
    let herm = TemporalMode::hermite_gaussian(lat, 20.0, 0.5, 1)?;
    let plan = EnsemblePlan::vacuum(lat, noise)?;
    let closed = temporal_mode_energy(&noise, &gauss);
    let mc = temporal_mode_energy_mc(&plan, &gauss)?;
    let se = mc.stderr.as_ref().map_or(f64::NAN, |s| s[0]);
    let z = (mc.values[0] - closed.printed_chain).abs() / se;
    r.metric("closed_printed_chain", closed.printed_chain);
    r.metric("closed_final_arrow", closed.final_arrow);
    r.metric("mc_energy", mc.values[0]);
    r.metric("mc_z", z);
    r.check(z <= N_SIGMA, "projection energy matches P_SF/2");
    let cov = mode_covariance_mc(&plan, &gauss, &herm)?;
    let cz = cov.values[0].norm() / cov.stderr.as_ref().map_or(f64::NAN, |s| s[0]);
    r.metric("orthogonal_covariance_z", cz);
    r.check(cz <= N_SIGMA, "orthogonal-mode covariance");
    r.check(closed.final_arrow_disagrees, "factor-of-2 flag present");
    r.note(format!(
        "printed chain gives P_SF/2 = {} ħω₀; the final arrow states ħω₀/2; they differ by a factor of 2",
        closed.printed_chain
    ));
    Ok(r)
}

/// Criteria 1 through 12, in order.
pub fn validate_all(seed: u64) -> Result<Vec<CriterionReport>> {
    Ok(vec![
        bogoliubov_invariant()?,
        limit_consistency()?,
        d_normalizations()?,
        sampler_calibration(seed)?,
        moment_theorem(seed)?,
        spectrum_equivalence(seed)?,
        photon_number_equivalence()?,
        four_frequency_identity(seed)?,
        high_gain_agreement(seed)?,
        tpa_flux_scaling()?,
        sfg_agreement(seed)?,
        mode_energy(seed)?,
    ])
}
