//! Result containers shared by the quantum and stochastic-field engines.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lattice::FrequencyLattice;
use crate::quads::Quad;
use crate::stats::{McSamples, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    QtClosedForm,
    SfClosedForm,
    SfMonteCarlo,
    SfRenormalized,
}

/// Photon distinguishability in the quantum four-frequency correlator:
/// `ξ = 1` for collinear co-polarized type-0/I, `ξ = 0` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Xi {
    Distinguishable,
    Indistinguishable,
}

impl Xi {
    pub fn value(self) -> f64 {
        match self {
            Xi::Distinguishable => 0.0,
            Xi::Indistinguishable => 1.0,
        }
    }

    pub fn from_flag(flag: u8) -> Option<Xi> {
        match flag {
            0 => Some(Xi::Distinguishable),
            1 => Some(Xi::Indistinguishable),
            _ => None,
        }
    }
}

/// Everything except the gain that must match for two results to be
/// subtracted from each other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultContext {
    pub lattice: FrequencyLattice,
    pub gate_duration: Option<f64>,
    pub p_sf: Option<f64>,
    pub xi: Option<Xi>,
}

impl ResultContext {
    pub fn new(lattice: FrequencyLattice) -> Self {
        Self {
            lattice,
            gate_duration: None,
            p_sf: None,
            xi: None,
        }
    }

    pub fn gated(mut self, duration: f64) -> Self {
        self.gate_duration = Some(duration);
        self
    }

    pub fn with_p_sf(mut self, p_sf: f64) -> Self {
        self.p_sf = Some(p_sf);
        self
    }

    pub fn with_xi(mut self, xi: Xi) -> Self {
        self.xi = Some(xi);
        self
    }
}

/// Split of a four-frequency correlator into its paired and accidental
/// parts: coherent/incoherent for the quantum form, correlated/uncorrelated
/// for the classical one.
#[derive(Debug, Clone, PartialEq)]
pub struct TermBreakdown<V> {
    pub coherent: Vec<V>,
    pub incoherent: Vec<V>,
}

/// Values of some observable at a list of probes.
#[derive(Debug, Clone)]
pub struct ProbeResult<P, V> {
    pub probes: Vec<P>,
    pub values: Vec<V>,
    pub terms: Option<TermBreakdown<V>>,
    pub provenance: Provenance,
    pub context: ResultContext,
    /// Present for Monte Carlo provenance only.
    pub stderr: Option<Vec<f64>>,
    pub mc: Option<McSamples<V>>,
}

impl<P, V: Sample> ProbeResult<P, V> {
    pub fn closed_form(
        probes: Vec<P>,
        values: Vec<V>,
        terms: Option<TermBreakdown<V>>,
        provenance: Provenance,
        context: ResultContext,
    ) -> Self {
        Self {
            probes,
            values,
            terms,
            provenance,
            context,
            stderr: None,
            mc: None,
        }
    }

    pub fn monte_carlo(probes: Vec<P>, samples: McSamples<V>, context: ResultContext) -> Self {
        let (values, stderr) = samples.estimates();
        Self {
            probes,
            values,
            terms: None,
            provenance: Provenance::SfMonteCarlo,
            context,
            stderr: Some(stderr),
            mc: Some(samples),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Two-frequency correlator at `(ω, ω̃)` index pairs.
pub type Corr2Result = ProbeResult<(usize, usize), Complex64>;
/// Four-frequency correlator at probe quads.
pub type Corr4Tensor = ProbeResult<Quad, Complex64>;
/// Real spectrum per lattice index.
pub type SpectrumResult = ProbeResult<usize, f64>;
/// A single Monte Carlo or closed-form number.
pub type ScalarResult = ProbeResult<(), f64>;
