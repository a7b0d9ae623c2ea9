//! Vacuum noise synthesis, gating and classical squeezing of realizations.
//!
//! The pipeline follows the gated classical field: vacuum noise `a`, gated
//! `A = W ⊛ a`, then `c = f·A + g·A*(2ω₀ − ω)`. Without a gate the last step
//! acts on `a` directly.

use ndarray::Array2;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::borrow::Cow;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gain::{GainParams, GainProfile};
use crate::gate::{GateConvolver, GateKernel};
use crate::lattice::FrequencyLattice;
use crate::stats::{stream_rng, Lineage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Classical vacuum spectral density.
    pub p_sf: f64,
    pub seed: u64,
    pub n_realizations: usize,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            p_sf: 0.5,
            seed: 0,
            n_realizations: 10_000,
        }
    }
}

impl NoiseSpec {
    pub fn new(p_sf: f64, seed: u64, n_realizations: usize) -> Self {
        Self {
            p_sf,
            seed,
            n_realizations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_sf > 0.0) || !self.p_sf.is_finite() {
            return Err(Error::InvalidParameter {
                field: "p_sf",
                reason: format!("spectral density must be positive (got {})", self.p_sf),
            });
        }
        if self.n_realizations == 0 {
            return Err(Error::InvalidParameter {
                field: "n_realizations",
                reason: "at least one realization is required".into(),
            });
        }
        Ok(())
    }

    pub fn lineage(&self) -> Lineage {
        Lineage {
            seed: self.seed,
            n_realizations: self.n_realizations,
            p_sf: self.p_sf,
        }
    }

    /// Realization `r` of white vacuum noise with variance `p_sf·2π/dω` per point.
    pub fn vacuum_realization(&self, lattice: &FrequencyLattice, r: usize) -> Vec<Complex64> {
        let mut rng = stream_rng(self.seed, r as u64);
        let amp = (self.p_sf * PI / lattice.d_omega()).sqrt();
        (0..lattice.len())
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let y: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(amp * x, amp * y)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Vacuum,
    Squeezed,
}

fn stage_name(stage: Stage, gated: bool) -> String {
    let base = match stage {
        Stage::Vacuum => "vacuum",
        Stage::Squeezed => "squeezed",
    };
    if gated {
        format!("gated {base}")
    } else {
        base.to_string()
    }
}

/// Read access to realizations, whether stored or regenerated on demand.
pub trait Realizations: Sync {
    fn lattice(&self) -> &FrequencyLattice;
    fn stage(&self) -> Stage;
    fn gate_duration(&self) -> Option<f64>;
    fn noise(&self) -> &NoiseSpec;
    fn realization(&self, r: usize) -> Cow<'_, [Complex64]>;

    fn n_realizations(&self) -> usize {
        self.noise().n_realizations
    }

    fn is_gated(&self) -> bool {
        self.gate_duration().is_some()
    }

    fn stage_name(&self) -> String {
        stage_name(self.stage(), self.is_gated())
    }
}

/// A stored `R × M` ensemble.
#[derive(Debug, Clone)]
pub struct FieldEnsemble {
    pub lattice: FrequencyLattice,
    pub stage: Stage,
    pub gate_duration: Option<f64>,
    pub noise: NoiseSpec,
    /// Absent for vacuum ensembles and for decoded dumps.
    pub gain_tag: Option<GainParams>,
    pub data: Array2<Complex64>,
}

impl Realizations for FieldEnsemble {
    fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    fn stage(&self) -> Stage {
        self.stage
    }

    fn gate_duration(&self) -> Option<f64> {
        self.gate_duration
    }

    fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    fn realization(&self, r: usize) -> Cow<'_, [Complex64]> {
        match self.data.row(r).to_slice() {
            Some(s) => Cow::Borrowed(s),
            None => Cow::Owned(self.data.row(r).to_vec()),
        }
    }
}

impl FieldEnsemble {
    fn map_rows<F>(&self, f: F) -> Result<Array2<Complex64>>
    where
        F: Fn(&[Complex64]) -> Result<Vec<Complex64>> + Sync,
    {
        let rows: Result<Vec<Vec<Complex64>>> = (0..self.n_realizations())
            .into_par_iter()
            .map(|r| f(&self.realization(r)))
            .collect();
        let flat: Vec<Complex64> = rows?.into_iter().flatten().collect();
        Ok(Array2::from_shape_vec((self.n_realizations(), self.lattice.len()), flat)
            .expect("row length equals lattice size"))
    }
}

/// A lazily evaluated ensemble: the recipe instead of the data.
///
/// Realization `r` is rebuilt from `(seed, r)` each time it is requested, so
/// memory stays `O(M)` per worker however large `R` is.
#[derive(Clone)]
pub struct EnsemblePlan {
    lattice: FrequencyLattice,
    noise: NoiseSpec,
    gate: Option<(GateKernel, GateConvolver)>,
    gain: Option<GainProfile>,
}

impl EnsemblePlan {
    pub fn vacuum(lattice: FrequencyLattice, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        Ok(Self {
            lattice,
            noise,
            gate: None,
            gain: None,
        })
    }

    pub fn gated(mut self, kernel: &GateKernel) -> Result<Self> {
        if self.gain.is_some() || self.gate.is_some() {
            return Err(Error::StageMismatch {
                expected: "vacuum",
                actual: self.stage_name(),
            });
        }
        if *kernel.lattice() != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        self.gate = Some((kernel.clone(), GateConvolver::new(kernel)));
        Ok(self)
    }

    pub fn squeezed(mut self, gain: &GainProfile) -> Result<Self> {
        if self.gain.is_some() {
            return Err(Error::StageMismatch {
                expected: "vacuum",
                actual: self.stage_name(),
            });
        }
        if gain.lattice != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        self.gain = Some(gain.clone());
        Ok(self)
    }

    /// The same plan with `g = 0`: identical vacuum draws, no amplification.
    pub fn baseline(&self) -> Self {
        let mut out = self.clone();
        if out.gain.is_some() {
            out.gain = Some(GainProfile::vacuum(self.lattice));
        }
        out
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        self.noise = noise;
        Ok(self)
    }

    pub fn gain(&self) -> Option<&GainProfile> {
        self.gain.as_ref()
    }

    pub fn kernel(&self) -> Option<&GateKernel> {
        self.gate.as_ref().map(|(k, _)| k)
    }

    pub fn materialize(&self) -> FieldEnsemble {
        let rows: Vec<Vec<Complex64>> = (0..self.n_realizations())
            .into_par_iter()
            .map(|r| self.realization(r).into_owned())
            .collect();
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        FieldEnsemble {
            lattice: self.lattice,
            stage: self.stage(),
            gate_duration: self.gate_duration(),
            noise: self.noise,
            gain_tag: self.gain.as_ref().map(|g| g.params),
            data: Array2::from_shape_vec((self.n_realizations(), self.lattice.len()), flat)
                .expect("row length equals lattice size"),
        }
    }
}

impl Realizations for EnsemblePlan {
    fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    fn stage(&self) -> Stage {
        if self.gain.is_some() {
            Stage::Squeezed
        } else {
            Stage::Vacuum
        }
    }

    fn gate_duration(&self) -> Option<f64> {
        self.gate.as_ref().map(|(k, _)| k.duration())
    }

    fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    fn realization(&self, r: usize) -> Cow<'_, [Complex64]> {
        let mut field = self.noise.vacuum_realization(&self.lattice, r);
        if let Some((_, conv)) = &self.gate {
            field = conv.apply(&field).expect("lattice-sized realization");
        }
        if let Some(gain) = &self.gain {
            field = squeeze_realization(&field, gain);
        }
        Cow::Owned(field)
    }
}

/// `b[k] = f[k]·a[k] + g[k]·conj(a[mirror(k)])`.
pub fn squeeze_realization(a: &[Complex64], gain: &GainProfile) -> Vec<Complex64> {
    let n = a.len();
    (0..n)
        .map(|k| gain.f[k] * a[k] + gain.g[k] * a[n - 1 - k].conj())
        .collect()
}

/// Materialized vacuum ensemble.
pub fn sample_vacuum(lattice: &FrequencyLattice, noise: &NoiseSpec) -> Result<FieldEnsemble> {
    Ok(EnsemblePlan::vacuum(*lattice, *noise)?.materialize())
}

/// Applies the classical Bogoliubov transform to a (possibly gated) vacuum ensemble.
pub fn squeeze(ensemble: &FieldEnsemble, gain: &GainProfile) -> Result<FieldEnsemble> {
    if ensemble.stage != Stage::Vacuum {
        return Err(Error::StageMismatch {
            expected: "vacuum",
            actual: ensemble.stage_name(),
        });
    }
    if gain.lattice != ensemble.lattice {
        return Err(Error::LatticeMismatch);
    }
    let data = ensemble.map_rows(|row| Ok(squeeze_realization(row, gain)))?;
    Ok(FieldEnsemble {
        stage: Stage::Squeezed,
        gain_tag: Some(gain.params),
        data,
        ..ensemble.clone()
    })
}

/// Gates a vacuum ensemble; squeezing comes after the gate.
pub fn gate_ensemble(ensemble: &FieldEnsemble, kernel: &GateKernel) -> Result<FieldEnsemble> {
    if ensemble.stage != Stage::Vacuum || ensemble.gate_duration.is_some() {
        return Err(Error::StageMismatch {
            expected: "vacuum",
            actual: ensemble.stage_name(),
        });
    }
    if *kernel.lattice() != ensemble.lattice {
        return Err(Error::LatticeMismatch);
    }
    let conv = GateConvolver::new(kernel);
    let data = ensemble.map_rows(|row| conv.apply(row))?;
    Ok(FieldEnsemble {
        gate_duration: Some(kernel.duration()),
        data,
        ..ensemble.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::{gain_profile, GainParams};

    fn lattice() -> FrequencyLattice {
        FrequencyLattice::new(10.0, 2.0, 21).unwrap()
    }

    #[test]
    fn realizations_regenerate_exactly() {
        let noise = NoiseSpec::new(0.5, 42, 8);
        let ens = sample_vacuum(&lattice(), &noise).unwrap();
        for r in [0, 5, 7] {
            assert_eq!(ens.realization(r).as_ref(), &noise.vacuum_realization(&lattice(), r)[..]);
        }
    }

    #[test]
    fn identity_squeeze_returns_input() {
        let ens = sample_vacuum(&lattice(), &NoiseSpec::new(0.5, 1, 4)).unwrap();
        let out = squeeze(&ens, &GainProfile::vacuum(lattice())).unwrap();
        assert_eq!(out.data, ens.data);
        assert_eq!(out.stage, Stage::Squeezed);
    }

    #[test]
    fn squeeze_spot_check() {
        let lat = lattice();
        let ens = sample_vacuum(&lat, &NoiseSpec::new(0.5, 3, 2)).unwrap();
        let gain = gain_profile(&lat, &GainParams::new(0.7, 1.0, 1.0)).unwrap();
        let out = squeeze(&ens, &gain).unwrap();
        let (k, mk) = (4, 16);
        let a = &ens.data;
        assert_eq!(out.data[[1, k]], gain.f[k] * a[[1, k]] + gain.g[k] * a[[1, mk]].conj());
        assert_eq!(out.data[[1, mk]], gain.f[mk] * a[[1, mk]] + gain.g[mk] * a[[1, k]].conj());
    }

    #[test]
    fn stage_order_is_enforced() {
        let lat = lattice();
        let ens = sample_vacuum(&lat, &NoiseSpec::new(0.5, 3, 2)).unwrap();
        let sq = squeeze(&ens, &GainProfile::vacuum(lat)).unwrap();
        let kernel = GateKernel::new(10.0, lat).unwrap();
        assert!(matches!(gate_ensemble(&sq, &kernel), Err(Error::StageMismatch { .. })));
        assert!(matches!(squeeze(&sq, &GainProfile::vacuum(lat)), Err(Error::StageMismatch { .. })));
        let gated = gate_ensemble(&ens, &kernel).unwrap();
        assert!(squeeze(&gated, &GainProfile::vacuum(lat)).is_ok());
        let plan = EnsemblePlan::vacuum(lat, NoiseSpec::new(0.5, 3, 2))
            .unwrap()
            .squeezed(&GainProfile::vacuum(lat))
            .unwrap();
        assert!(plan.gated(&kernel).is_err());
    }

    #[test]
    fn plan_matches_stored_pipeline() {
        let lat = lattice();
        let noise = NoiseSpec::new(0.5, 11, 3);
        let kernel = GateKernel::new(10.0, lat).unwrap();
        let gain = gain_profile(&lat, &GainParams::new(0.7, 1.0, 1.0)).unwrap();
        let stored = squeeze(&gate_ensemble(&sample_vacuum(&lat, &noise).unwrap(), &kernel).unwrap(), &gain).unwrap();
        let plan = EnsemblePlan::vacuum(lat, noise)
            .unwrap()
            .gated(&kernel)
            .unwrap()
            .squeezed(&gain)
            .unwrap();
        assert_eq!(plan.materialize().data, stored.data);
        assert_eq!(plan.stage_name(), "gated squeezed");
    }

    #[test]
    fn invalid_noise_is_rejected() {
        assert!(NoiseSpec::new(0.0, 0, 10).validate().is_err());
        assert!(NoiseSpec::new(0.5, 0, 0).validate().is_err());
    }
}
