//! Monte Carlo estimators over realizations.
//!
//! Ungated moments carry one `2πδ(0) = delta_peak` per conjugate pair and are
//! divided by it; gated moments are already in continuum units because the
//! gate's `D(0) = T` replaces the bare delta.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::correlator::{Corr2Result, Corr4Tensor, ResultContext, ScalarResult, SpectrumResult};
use crate::error::{Error, Result};
use crate::quads::Quad;
use crate::sf_engine::ensemble::Realizations;
use crate::stats::{McSamples, Sample};

pub const MIN_REALIZATIONS: usize = 2;
pub const MIN_REALIZATIONS_CORR4: usize = 1000;

fn require<S: Realizations + ?Sized>(src: &S, needed: usize) -> Result<()> {
    let have = src.n_realizations();
    if have < needed {
        return Err(Error::InsufficientRealizations { needed, have });
    }
    Ok(())
}

/// Divisor turning a lattice moment with `pairs` conjugate pairs into
/// continuum units.
pub fn moment_scale<S: Realizations + ?Sized>(src: &S, pairs: i32) -> f64 {
    if src.is_gated() {
        1.0
    } else {
        src.lattice().delta_peak().powi(pairs)
    }
}

fn context<S: Realizations + ?Sized>(src: &S) -> ResultContext {
    let ctx = ResultContext::new(*src.lattice()).with_p_sf(src.noise().p_sf);
    match src.gate_duration() {
        Some(t) => ctx.gated(t),
        None => ctx,
    }
}

/// One row per realization, reduced later in realization order.
pub fn collect_rows<S, V, F>(src: &S, per_realization: F) -> McSamples<V>
where
    S: Realizations + ?Sized,
    V: Sample,
    F: Fn(&[Complex64]) -> Vec<V> + Sync,
{
    let rows: Vec<Vec<V>> = (0..src.n_realizations())
        .into_par_iter()
        .map(|r| per_realization(&src.realization(r)))
        .collect();
    McSamples::from_rows(src.noise().lineage(), rows)
}

/// `⟨|b(ω)|²⟩` per grid point.
pub fn spectrum_sf_mc<S: Realizations + ?Sized>(src: &S) -> Result<SpectrumResult> {
    require(src, MIN_REALIZATIONS)?;
    let scale = moment_scale(src, 1);
    let samples = collect_rows(src, |c| c.iter().map(|v| v.norm_sqr() / scale).collect());
    Ok(SpectrumResult::monte_carlo(
        (0..src.lattice().len()).collect(),
        samples,
        context(src),
    ))
}

/// `⟨c*(ω_j)c(ω_k)⟩` at probe pairs.
pub fn corr2_sf_mc<S: Realizations + ?Sized>(
    src: &S,
    probes: &[(usize, usize)],
) -> Result<Corr2Result> {
    require(src, MIN_REALIZATIONS)?;
    let scale = moment_scale(src, 1);
    let samples = collect_rows(src, |c| {
        probes.iter().map(|&(j, k)| c[j].conj() * c[k] / scale).collect()
    });
    Ok(Corr2Result::monte_carlo(probes.to_vec(), samples, context(src)))
}

/// The unconjugated `⟨c(ω_j)c(ω_k)⟩` at probe pairs.
pub fn pair_moment_mc<S: Realizations + ?Sized>(
    src: &S,
    probes: &[(usize, usize)],
) -> Result<Corr2Result> {
    require(src, MIN_REALIZATIONS)?;
    let scale = moment_scale(src, 1);
    let samples = collect_rows(src, |c| {
        probes.iter().map(|&(j, k)| c[j] * c[k] / scale).collect()
    });
    Ok(Corr2Result::monte_carlo(probes.to_vec(), samples, context(src)))
}

/// `∫đω ⟨|c(ω)|²⟩` of a gated ensemble.
pub fn energy_sf_mc<S: Realizations + ?Sized>(src: &S) -> Result<ScalarResult> {
    require(src, MIN_REALIZATIONS)?;
    if !src.is_gated() {
        return Err(Error::StageMismatch {
            expected: "gated",
            actual: src.stage_name(),
        });
    }
    let m = src.lattice().measure();
    let samples = collect_rows(src, |c| vec![m * c.iter().map(|v| v.norm_sqr()).sum::<f64>()]);
    Ok(ScalarResult::monte_carlo(vec![()], samples, context(src)))
}

/// `⟨c*(ω_a)c*(ω_b)c(ω_c)c(ω_d)⟩` at probe quads.
pub fn corr4_sf_mc<S: Realizations + ?Sized>(src: &S, quads: &[Quad]) -> Result<Corr4Tensor> {
    require(src, MIN_REALIZATIONS_CORR4)?;
    let scale = moment_scale(src, 2);
    let samples = collect_rows(src, |c| {
        quads
            .iter()
            .map(|q| (c[q.a] * c[q.b]).conj() * (c[q.c] * c[q.d]) / scale)
            .collect()
    });
    Ok(Corr4Tensor::monte_carlo(quads.to_vec(), samples, context(src)))
}

/// The Gaussian moment theorem applied to the ensemble's own second moments:
/// `⟨c*_a c*_b⟩⟨c_c c_d⟩ + ⟨c*_a c_c⟩⟨c*_b c_d⟩ + ⟨c*_a c_d⟩⟨c*_b c_c⟩`.
pub fn moment_closure<S: Realizations + ?Sized>(src: &S, quads: &[Quad]) -> Result<Vec<Complex64>> {
    let mut normal = Vec::with_capacity(4 * quads.len());
    let mut anomalous = Vec::with_capacity(2 * quads.len());
    for q in quads {
        normal.extend([(q.a, q.c), (q.b, q.d), (q.a, q.d), (q.b, q.c)]);
        anomalous.extend([(q.a, q.b), (q.c, q.d)]);
    }
    let n = corr2_sf_mc(src, &normal)?.values;
    let p = pair_moment_mc(src, &anomalous)?.values;
    Ok((0..quads.len())
        .map(|i| {
            p[2 * i].conj() * p[2 * i + 1] + n[4 * i] * n[4 * i + 1] + n[4 * i + 2] * n[4 * i + 3]
        })
        .collect())
}
