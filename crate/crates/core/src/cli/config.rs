//! Experiment configuration: TOML in, validated parameters out.
//!
//! Every frequency in the file is a dimensionless detuning in units of
//! `lattice.reference_bandwidth`, except `lattice.omega0` which is absolute in
//! the same unit. Times are in units of the inverse reference bandwidth.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

use crate::correlator::Xi;
use crate::error::{Error, Result};
use crate::gain::{GainConvention, GainParams};
use crate::gate::GateKernel;
use crate::lattice::FrequencyLattice;
use crate::observables::{KernelNormalization, SfgParams, TemporalMode, TpaKernel};
use crate::quads::QuadFamily;
use crate::sf_engine::estimate::{MIN_REALIZATIONS, MIN_REALIZATIONS_CORR4};
use crate::sf_engine::NoiseSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Experiment {
    Spectrum,
    Corr2,
    Corr4Identity,
    TpaScaling,
    SfgSpectrum,
    ModeEnergy,
    ValidateAll,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Corr2 => "corr2",
            Experiment::Corr4Identity => "corr4-identity",
            Experiment::TpaScaling => "tpa-scaling",
            Experiment::SfgSpectrum => "sfg-spectrum",
            Experiment::ModeEnergy => "mode-energy",
            Experiment::ValidateAll => "validate-all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub omega0: f64,
    pub half_width: f64,
    pub n_points: usize,
    #[serde(default = "one")]
    pub reference_bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainConfig {
    pub gamma: f64,
    pub kappa: f64,
    pub z: f64,
    #[serde(default)]
    pub convention: GainConvention,
    #[serde(default)]
    pub compensate_dispersion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "half")]
    pub p_sf: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default = "default_xi")]
    pub xi: Xi,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default = "all_families")]
    pub families: Vec<QuadFamily>,
    #[serde(default = "default_quad_count")]
    pub count: usize,
    /// Quads and pairs are drawn where `|g|²` exceeds this fraction of its peak.
    #[serde(default = "default_support")]
    pub support_fraction: f64,
    /// Explicit `(j, k)` index pairs for `corr2`; empty means automatic.
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            families: all_families(),
            count: default_quad_count(),
            support_fraction: default_support(),
            pairs: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TpaConfig {
    #[serde(default = "half")]
    pub sigma_f: f64,
    /// Detuning of the final-state resonance from `2ω₀`.
    #[serde(default)]
    pub sum_detuning: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub normalization: KernelNormalization,
    #[serde(default = "default_gammas")]
    pub gammas: Vec<f64>,
}

impl Default for TpaConfig {
    fn default() -> Self {
        Self {
            sigma_f: 0.5,
            sum_detuning: 0.0,
            amplitude: 1.0,
            normalization: KernelNormalization::Area,
            gammas: default_gammas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfgConfig {
    #[serde(default = "default_k2prime")]
    pub k2prime: f64,
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "one")]
    pub xi_c: f64,
    #[serde(default = "default_q_min")]
    pub q_min: i64,
    #[serde(default = "default_q_max")]
    pub q_max: i64,
    #[serde(default = "default_q_step")]
    pub q_step: usize,
}

impl Default for SfgConfig {
    fn default() -> Self {
        Self {
            k2prime: default_k2prime(),
            length: 1.0,
            xi_c: 1.0,
            q_min: default_q_min(),
            q_max: default_q_max(),
            q_step: default_q_step(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    #[serde(default)]
    pub center_detuning: f64,
    #[serde(default = "half")]
    pub width: f64,
    #[serde(default)]
    pub order: u32,
    /// Hermite-Gaussian order of the mode used for the covariance check.
    #[serde(default = "one_u32")]
    pub partner_order: u32,
}

impl Default for ModeConfig {
    fn default() -> Self {
        Self {
            center_detuning: 0.0,
            width: 0.5,
            order: 0,
            partner_order: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunConfig,
    pub lattice: LatticeConfig,
    pub gain: GainConfig,
    pub gate: GateConfig,
    #[serde(default = "default_noise")]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub probes: ProbeConfig,
    #[serde(default)]
    pub tpa: TpaConfig,
    #[serde(default)]
    pub sfg: SfgConfig,
    #[serde(default)]
    pub mode: ModeConfig,
}

fn one() -> f64 {
    1.0
}
fn one_u32() -> u32 {
    1
}
fn half() -> f64 {
    0.5
}
fn default_realizations() -> usize {
    10_000
}
fn default_xi() -> Xi {
    Xi::Indistinguishable
}
fn all_families() -> Vec<QuadFamily> {
    QuadFamily::ALL.to_vec()
}
fn default_quad_count() -> usize {
    32
}
fn default_support() -> f64 {
    1e-2
}
fn default_gammas() -> Vec<f64> {
    vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
}
fn default_k2prime() -> f64 {
    0.2
}
fn default_q_min() -> i64 {
    -30
}
fn default_q_max() -> i64 {
    30
}
fn default_q_step() -> usize {
    2
}
fn default_noise() -> NoiseConfig {
    NoiseConfig {
        p_sf: 0.5,
        seed: 0,
        n_realizations: default_realizations(),
    }
}

/// The physical objects a validated config describes, in internal units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub lattice: FrequencyLattice,
    pub gain: GainParams,
    pub kernel: GateKernel,
    pub noise: NoiseSpec,
    pub tpa: TpaKernel,
    pub sfg: SfgParams,
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: Some(field.to_string()),
        line: None,
        message: message.into(),
    }
}

fn relabel(err: Error, section: &str) -> Error {
    match err {
        Error::InvalidParameter { field, reason } => invalid(&format!("{section}.{field}"), reason),
        Error::UnderResolved(msg) => Error::UnderResolved(format!("{section}: {msg}")),
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config {
            field: None,
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.resolve().map_err(|e| locate(e, text))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// Serialized form with run-placement fields removed. Identical for any
    /// two configs that must produce identical outputs.
    pub fn canonical(&self) -> Result<String> {
        let mut c = self.clone();
        c.run.output_dir = None;
        c.run.workers = None;
        c.to_toml()
    }

    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical()?.as_bytes())))
    }

    /// Re-validates every physical parameter and converts to internal units.
    pub fn resolve(&self) -> Result<Resolved> {
        let l = &self.lattice;
        let bw = l.reference_bandwidth;
        if !(bw > 0.0) || !bw.is_finite() {
            return Err(invalid("lattice.reference_bandwidth", "must be positive"));
        }
        if l.n_points < 3 || l.n_points.is_multiple_of(2) {
            return Err(invalid(
                "lattice.n_points",
                format!("must be odd and at least 3 (got {})", l.n_points),
            ));
        }
        if !(l.half_width > 0.0) || !l.half_width.is_finite() {
            return Err(invalid("lattice.half_width", "must be positive"));
        }
        if !(l.omega0 > l.half_width) || !l.omega0.is_finite() {
            return Err(invalid("lattice.omega0", "must exceed half_width"));
        }
        let lattice = FrequencyLattice::new(l.omega0 * bw, l.half_width * bw, l.n_points)?;

        let g = &self.gain;
        let gain = GainParams {
            gamma: g.gamma,
            kappa: g.kappa / (bw * bw),
            z: g.z,
            convention: g.convention,
            compensate_dispersion: g.compensate_dispersion,
        };
        gain.validate().map_err(|e| relabel(e, "gain"))?;

        if !(self.gate.duration > 0.0) || !self.gate.duration.is_finite() {
            return Err(invalid("gate.duration", "must be positive"));
        }
        let kernel = GateKernel::new(self.gate.duration / bw, lattice)?;

        let n = &self.noise;
        let noise = NoiseSpec::new(n.p_sf, n.seed, n.n_realizations);
        noise.validate().map_err(|e| relabel(e, "noise"))?;
        if n.seed > i64::MAX as u64 {
            return Err(invalid("noise.seed", "must fit in a signed 64-bit TOML integer"));
        }
        let needed = match self.run.experiment {
            Experiment::Corr4Identity => MIN_REALIZATIONS_CORR4,
            _ => MIN_REALIZATIONS,
        };
        if n.n_realizations < needed {
            return Err(invalid(
                "noise.n_realizations",
                format!("{} needs at least {needed} realizations", self.run.experiment.name()),
            ));
        }
        if matches!(self.run.experiment, Experiment::Corr4Identity) && n.p_sf != 0.5 {
            return Err(invalid("noise.p_sf", "the identity check is defined at P_SF = 1/2"));
        }
        if self.run.workers == Some(0) {
            return Err(invalid("run.workers", "must be at least 1"));
        }

        let p = &self.probes;
        if p.count == 0 {
            return Err(invalid("probes.count", "must be at least 1"));
        }
        if p.families.is_empty() {
            return Err(invalid("probes.families", "at least one family is required"));
        }
        if !(p.support_fraction > 0.0 && p.support_fraction <= 1.0) {
            return Err(invalid("probes.support_fraction", "must lie in (0, 1]"));
        }
        if let Some(&(j, k)) = p.pairs.iter().find(|&&(j, k)| j >= l.n_points || k >= l.n_points) {
            return Err(invalid(
                "probes.pairs",
                format!("pair ({j}, {k}) lies outside the {}-point lattice", l.n_points),
            ));
        }

        let t = &self.tpa;
        let tpa = TpaKernel {
            omega_f: 2.0 * lattice.omega0() + t.sum_detuning * bw,
            sigma_f: t.sigma_f * bw,
            amplitude: t.amplitude,
            normalization: t.normalization,
        };
        if !(t.sigma_f > 0.0) || !t.sigma_f.is_finite() {
            return Err(invalid("tpa.sigma_f", "must be positive"));
        }
        if matches!(self.run.experiment, Experiment::TpaScaling) {
            tpa.validate(&lattice).map_err(|e| relabel(e, "tpa"))?;
            if t.gammas.len() < 2 || t.gammas.iter().any(|&g| !(g > 0.0) || !g.is_finite()) {
                return Err(invalid("tpa.gammas", "need at least two positive gains"));
            }
        }

        let s = &self.sfg;
        let sfg = SfgParams {
            k2prime: s.k2prime / (bw * bw),
            length: s.length,
            xi_c: s.xi_c,
        };
        if s.q_step == 0 {
            return Err(invalid("sfg.q_step", "must be at least 1"));
        }
        if s.q_min > s.q_max {
            return Err(invalid("sfg.q_min", "must not exceed q_max"));
        }
        if matches!(self.run.experiment, Experiment::SfgSpectrum) {
            let span = (l.n_points - 1) as i64;
            if s.q_min < -span || s.q_max > span {
                return Err(invalid("sfg.q_max", format!("offsets must lie within ±{span}")));
            }
            sfg.validate(&lattice).map_err(|e| relabel(e, "sfg"))?;
        }

        let m = &self.mode;
        if !(m.width > 0.0) || !m.width.is_finite() {
            return Err(invalid("mode.width", "must be positive"));
        }
        if matches!(self.run.experiment, Experiment::ModeEnergy) {
            self.modes(&lattice)?;
        }

        Ok(Resolved {
            lattice,
            gain,
            kernel,
            noise,
            tpa,
            sfg,
        })
    }

    /// The projection mode and its covariance partner.
    pub fn modes(&self, lattice: &FrequencyLattice) -> Result<(TemporalMode, TemporalMode)> {
        let m = &self.mode;
        let bw = self.lattice.reference_bandwidth;
        let center = lattice.omega0() + m.center_detuning * bw;
        let build = |order| {
            TemporalMode::hermite_gaussian(*lattice, center, m.width * bw, order).map_err(|e| match e {
                Error::ModeLeak { .. } | Error::ModeNotNormalized { .. } => invalid("mode.width", e.to_string()),
                other => other,
            })
        };
        if m.order == m.partner_order {
            return Err(invalid("mode.partner_order", "must differ from mode.order"));
        }
        Ok((build(m.order)?, build(m.partner_order)?))
    }

    pub fn offsets(&self) -> Vec<i64> {
        let s = &self.sfg;
        (s.q_min..=s.q_max).step_by(s.q_step).collect()
    }
}

/// 1-based line containing byte `offset`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `[section]`.
pub fn find_key_line(text: &str, path: &str) -> Option<usize> {
    let (section, key) = path.rsplit_once('.')?;
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
        } else if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn locate(err: Error, text: &str) -> Error {
    match err {
        Error::Config {
            field: Some(field),
            line: None,
            message,
        } => Error::Config {
            line: find_key_line(text, &field),
            field: Some(field),
            message,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
[run]
experiment = "spectrum"

[lattice]
omega0 = 40.0
half_width = 6.0
n_points = 241

[gain]
gamma = 1.0
kappa = 1.0
z = 1.0
compensate_dispersion = true

[gate]
duration = 20.0
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.noise.p_sf, 0.5);
        assert_eq!(cfg.probes.families.len(), 3);
        assert_eq!(cfg.run.xi, Xi::Indistinguishable);
        assert_eq!(cfg.offsets().len(), 31);
    }

    #[test]
    fn round_trip_is_identical() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash().unwrap(), again.hash().unwrap());
    }

    #[test]
    fn even_n_points_names_field_and_line() {
        let text = MINIMAL.replace("241", "240");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Config { field, line, .. }) => {
                assert_eq!(field.as_deref(), Some("lattice.n_points"));
                assert_eq!(line, Some(8));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let text = MINIMAL.replace("z = 1.0", "z = ");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, Some(13)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("z = 1.0", "z = 1.0\ngama = 2.0");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn gain_errors_are_scoped() {
        let text = MINIMAL.replace("gamma = 1.0", "gamma = -1.0");
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Config { field, line, .. }) => {
                assert_eq!(field.as_deref(), Some("gain.gamma"));
                assert_eq!(line, Some(11));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn placement_does_not_change_the_hash() {
        let mut cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        let h = cfg.hash().unwrap();
        cfg.run.workers = Some(8);
        cfg.run.output_dir = Some("elsewhere".into());
        assert_eq!(cfg.hash().unwrap(), h);
        cfg.noise.seed = 1;
        assert_ne!(cfg.hash().unwrap(), h);
    }

    #[test]
    fn reference_bandwidth_scales_to_internal_units() {
        let a = ExperimentConfig::from_toml(MINIMAL).unwrap().resolve().unwrap();
        let text = MINIMAL.replace("n_points = 241", "n_points = 241\nreference_bandwidth = 2.0");
        let b = ExperimentConfig::from_toml(&text).unwrap().resolve().unwrap();
        assert_eq!(b.lattice.half_width(), 2.0 * a.lattice.half_width());
        assert_eq!(b.kernel.duration(), a.kernel.duration() / 2.0);
        // κ(ω−ω₀)² and ΔT are invariant
        assert_eq!(b.gain.kappa * b.lattice.d_omega().powi(2), a.gain.kappa * a.lattice.d_omega().powi(2));
    }

    #[test]
    fn sfg_resolution_is_checked_for_sfg_runs() {
        let text = MINIMAL.replace("\"spectrum\"", "\"sfg-spectrum\"") + "\n[sfg]\nk2prime = 50.0\n";
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::UnderResolved(_))));
    }

    #[test]
    fn corr4_requires_enough_realizations() {
        let text = MINIMAL.replace("\"spectrum\"", "\"corr4-identity\"") + "\n[noise]\nn_realizations = 10\n";
        match ExperimentConfig::from_toml(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field.as_deref(), Some("noise.n_realizations")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
