//! The classical stochastic-field model: Gaussian zero-point noise, the
//! classical Bogoliubov transform, the gate, Monte Carlo estimators, closed
//! forms, and `g = 0` renormalization.

pub mod closed;
pub mod dump;
pub mod ensemble;
pub mod estimate;
pub mod renorm;

pub use closed::{
    corr2_sf_closed, corr4_sf_closed, corr4_sf_moment_theorem, energy_sf_closed,
    identity_residual, spectrum_sf_closed, IdentityResidual, RenormalizedSfCorr4, SfCorr4, SfMomentCorr4,
};
pub use ensemble::{
    gate_ensemble, sample_vacuum, squeeze, EnsemblePlan, FieldEnsemble, NoiseSpec, Realizations,
    Stage,
};
pub use estimate::{
    corr2_sf_mc, corr4_sf_mc, energy_sf_mc, moment_closure, pair_moment_mc, spectrum_sf_mc,
};
pub use renorm::{renormalize, renormalize_energy};
