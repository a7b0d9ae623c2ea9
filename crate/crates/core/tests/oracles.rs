//! Independent reference implementations checked against the library.

use num_complex::Complex64;
use std::f64::consts::PI;

use squeezed_vacuum::correlator::Xi;
use squeezed_vacuum::gain::{gain_profile, GainParams, GainProfile};
use squeezed_vacuum::gate::{gate_field, GateKernel};
use squeezed_vacuum::lattice::FrequencyLattice;
use squeezed_vacuum::observables::{
    sfg_spectrum_qt, tpa_probability, tpa_probability_mc, KernelNormalization, SfgParams, TpaKernel,
};
use squeezed_vacuum::qt_engine::{corr4_qt, photon_number_qt, spectrum_qt, QtCorr4};
use squeezed_vacuum::quads::Quad;
use squeezed_vacuum::sf_engine::{corr4_sf_closed, spectrum_sf_closed, EnsemblePlan, NoiseSpec, SfMomentCorr4};
use squeezed_vacuum::stats::stream_rng;

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

fn d(t: f64, delta: f64) -> f64 {
    t * sinc(delta * t / 2.0)
}

fn compensated(lat: &FrequencyLattice, gamma: f64) -> GainProfile {
    gain_profile(lat, &GainParams::new(gamma, 1.0, 1.0).compensated(true)).unwrap()
}

/// `⟨c†_a c†_b c_c c_d⟩` written out from frequencies, not lattice offsets.
fn qt_corr(gain: &GainProfile, t: f64, q: [usize; 4], xi: f64) -> Complex64 {
    let lat = gain.lattice;
    let w = lat.omegas();
    let w0 = lat.omega0();
    let (f, g) = (&gain.f, &gain.g);
    let [a, b, c, dd] = q;
    let coh = g[a].conj() * f[a].conj() * f[c] * g[c] * d(t, 2.0 * w0 - w[a] - w[b]) * d(t, 2.0 * w0 - w[dd] - w[c]);
    let incoh = g[a].norm_sqr()
        * g[b].norm_sqr()
        * (d(t, w[b] - w[c]) * d(t, w[a] - w[dd]) + xi * d(t, w[a] - w[c]) * d(t, w[b] - w[dd]));
    coh + incoh
}

fn index_of(lat: &FrequencyLattice, omega: f64) -> Option<usize> {
    (0..lat.len()).find(|&k| (lat.omega(k) - omega).abs() < 1e-9 * lat.d_omega())
}

#[test]
fn fft_gate_matches_brute_force_quadrature() {
    use rand::Rng;
    for (n, t) in [(65, 7.0), (241, 20.0), (401, 55.5)] {
        let lat = FrequencyLattice::new(30.0, 4.0, n).unwrap();
        let kernel = GateKernel::new(t, lat).unwrap();
        let mut rng = stream_rng(11, n as u64);
        let a: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let m = lat.d_omega() / (2.0 * PI);
        let brute: Vec<Complex64> = (0..n)
            .map(|k| (0..n).map(|j| a[j] * m * d(t, lat.omega(k) - lat.omega(j))).sum())
            .collect();
        let fft = gate_field(&a, &kernel).unwrap();
        let scale = brute.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let err = brute.iter().zip(&fft).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * scale, "n={n}: {err:e} vs scale {scale:e}");
    }
}

#[test]
fn tpa_triple_loop_on_five_points() {
    let lat = FrequencyLattice::new(10.0, 2.0, 5).unwrap();
    let t = 3.0;
    let kernel = GateKernel::new(t, lat).unwrap();
    let gain = compensated(&lat, 0.7);
    let sigma = 3.0;
    let tpa = TpaKernel::resonant(&lat, sigma);
    let lorentz = |s: f64| (sigma / PI) / ((s - 20.0).powi(2) + sigma * sigma);
    let m = lat.d_omega() / (2.0 * PI);
    let mut expect = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    for j in 0..5 {
        for k in 0..5 {
            for i in 0..5 {
                let wb = lat.omega(j) + lat.omega(k) - lat.omega(i);
                if let Some(b) = index_of(&lat, wb) {
                    terms += 1;
                    expect += m * m * m * lorentz(lat.omega(j) + lat.omega(k)) * qt_corr(&gain, t, [i, b, j, k], 1.0);
                }
            }
        }
    }
    // 125 triples minus those with ω_b outside the band
    assert_eq!(terms, 85);
    let got = tpa_probability(&QtCorr4::new(&gain, &kernel, Xi::Indistinguishable).unwrap(), &lat, &tpa).unwrap();
    assert!(expect.im.abs() < 1e-12 * expect.norm());
    assert!((got.total - expect.re).abs() <= 1e-12 * expect.re.abs(), "{} vs {}", got.total, expect.re);
}

#[test]
fn sfg_double_loop_on_51_points() {
    let lat = FrequencyLattice::new(20.0, 4.0, 51).unwrap();
    let t = 20.0;
    let kernel = GateKernel::new(t, lat).unwrap();
    let gain = compensated(&lat, 0.8);
    let params = SfgParams {
        k2prime: 0.2,
        length: 1.0,
        xi_c: 1.3,
    };
    let offsets: Vec<i64> = (-50..=50).step_by(5).collect();
    let got = sfg_spectrum_qt(&gain, &kernel, &params, &offsets, Xi::Indistinguishable).unwrap();
    let m = lat.d_omega() / (2.0 * PI);
    let w0 = lat.omega0();
    let phi = |w1: f64, w2: f64| sinc(0.1 * (w1 - w0) * (w2 - w0));
    for (n, &q) in offsets.iter().enumerate() {
        let w3 = 2.0 * w0 + q as f64 * lat.d_omega();
        let pairs: Vec<(usize, usize)> = (0..51)
            .filter_map(|i| index_of(&lat, w3 - lat.omega(i)).map(|p| (i, p)))
            .collect();
        let mut s = Complex64::new(0.0, 0.0);
        for &(i, p) in &pairs {
            for &(k, r) in &pairs {
                let w = phi(lat.omega(i), lat.omega(p)) * phi(lat.omega(k), lat.omega(r));
                s += 1.69 * m * m * w * qt_corr(&gain, t, [i, p, k, r], 1.0);
            }
        }
        let scale = s.norm().max(1e-300);
        assert!((got.values[n] - s.re).abs() <= 1e-10 * scale, "q={q}: {} vs {}", got.values[n], s.re);
    }
}

#[test]
fn frozen_hand_values() {
    let lat = FrequencyLattice::new(40.0, 6.0, 241).unwrap();
    let gain = compensated(&lat, 1.0);
    let c = lat.center_index();
    let t = 20.0;
    let kernel = GateKernel::new(t, lat).unwrap();
    // sinh²(1), P(2sinh²(1) + 1) at P = ½ and 1
    assert!((spectrum_qt(&gain)[c] - 1.381_097_845_541_815_7).abs() < 1e-13);
    assert!((spectrum_sf_closed(&gain, 0.5).values[c] - 1.881_097_845_541_815_7).abs() < 1e-13);
    assert!((spectrum_sf_closed(&gain, 1.0).values[c] - 3.762_195_691_083_631_5).abs() < 1e-13);
    // degenerate quad: quantum sinh²cosh² + 2sinh⁴, classical sinh²cosh² + 2(sinh² + ½)², in units of T²
    let q = [Quad::new(c, c, c, c)];
    let qt = corr4_qt(&gain, &kernel, &q, Xi::Indistinguishable).unwrap().values[0].re / (t * t);
    let sf = corr4_sf_closed(&gain, &kernel, &q, 0.5).unwrap().values[0].re / (t * t);
    assert!((qt - (3.288_529_104_502_061 + 3.814_862_517_920_49)).abs() < 1e-12);
    assert!((sf - 10.365_587_313_506_182).abs() < 1e-12);
}

#[test]
fn photon_number_matches_direct_sum() {
    let lat = FrequencyLattice::new(40.0, 6.0, 241).unwrap();
    let gain = compensated(&lat, 0.3);
    let kernel = GateKernel::new(25.0, lat).unwrap();
    let direct: f64 = (0..241).map(|k| gain.g[k].norm_sqr()).sum::<f64>() * lat.d_omega() / (2.0 * PI) * 25.0;
    let got = photon_number_qt(&gain, &kernel).unwrap();
    assert!((got - direct).abs() <= 1e-13 * direct);
}

#[test]
fn tpa_monte_carlo_converges_to_moment_theorem() {
    let lat = FrequencyLattice::new(10.0, 2.0, 21).unwrap();
    let kernel = GateKernel::new(20.0, lat).unwrap();
    let gain = compensated(&lat, 0.8);
    let tpa = TpaKernel::resonant(&lat, 0.7);
    let closed = tpa_probability(&SfMomentCorr4::new(&gain, &kernel, 0.5).unwrap(), &lat, &tpa).unwrap();
    let plan = EnsemblePlan::vacuum(lat, NoiseSpec::new(0.5, 5, 4000))
        .unwrap()
        .gated(&kernel)
        .unwrap()
        .squeezed(&gain)
        .unwrap();
    let mc = tpa_probability_mc(&plan, &tpa).unwrap();
    let se = mc.stderr.unwrap()[0];
    let z = (mc.values[0] - closed.total).abs() / se;
    assert!(z < 5.0, "z = {z}: mc {} ± {se} vs {}", mc.values[0], closed.total);
}

fn tpa_total(sigma: f64, t: f64, norm: KernelNormalization) -> f64 {
    let lat = FrequencyLattice::new(40.0, 6.0, 241).unwrap();
    let gain = compensated(&lat, 0.5);
    let kernel = GateKernel::new(t, lat).unwrap();
    let tpa = TpaKernel::resonant(&lat, sigma).with_normalization(norm);
    tpa_probability(&QtCorr4::new(&gain, &kernel, Xi::Indistinguishable).unwrap(), &lat, &tpa)
        .unwrap()
        .total
}

#[test]
fn tpa_linewidth_dependence() {
    let sigmas = [0.16, 0.3, 0.6, 1.2, 2.4, 4.8];
    let peak: Vec<f64> = sigmas.iter().map(|&s| tpa_total(s, 20.0, KernelNormalization::Peak)).collect();
    let area: Vec<f64> = sigmas.iter().map(|&s| tpa_total(s, 20.0, KernelNormalization::Area)).collect();
    // unit-peak response grows and saturates; unit-area response dilutes
    assert!(peak.windows(2).all(|w| w[1] > w[0]), "{peak:?}");
    let steps: Vec<f64> = peak.windows(2).map(|w| w[1] / w[0]).collect();
    assert!(steps.windows(2).all(|w| w[1] < w[0]), "{steps:?}");
    assert!(area.windows(2).all(|w| w[1] < w[0]), "{area:?}");
}

#[test]
fn tpa_grows_with_gate_duration() {
    let p: Vec<f64> = [5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|&t| tpa_total(0.5, t, KernelNormalization::Area))
        .collect();
    assert!(p.windows(2).all(|w| w[1] > w[0]), "{p:?}");
}
