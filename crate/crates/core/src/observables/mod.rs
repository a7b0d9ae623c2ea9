//! Physical predictions built on the correlators: two-photon absorption,
//! sum-frequency generation and temporal-mode energy.

pub mod mode;
pub mod sfg;
pub mod tpa;

pub use mode::{mode_covariance_mc, temporal_mode_energy, temporal_mode_energy_mc, ModeEnergy, TemporalMode};
pub use sfg::{
    sfg_phase_matching, sfg_spectrum, sfg_spectrum_qt, sfg_spectrum_sf, SfgParams, SfgSpectrum,
};
pub use tpa::{
    flux_scaling_sweep, tpa_probability, tpa_probability_mc, FluxSweep, KernelNormalization,
    TpaKernel, TpaProbability,
};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Imaginary part allowed on a quantity that must be real, relative to its modulus.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

pub(crate) fn real_part(z: Complex64, scale: f64, context: &'static str) -> Result<f64> {
    let scale = scale.max(z.norm());
    if scale > 0.0 && z.im.abs() > IMAGINARY_TOLERANCE * scale {
        return Err(Error::ImaginaryResidual {
            context,
            residual: z.im.abs() / scale,
        });
    }
    Ok(z.re)
}
