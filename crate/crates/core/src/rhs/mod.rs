//! Coupled-dipole forward model of the holographic surface.

mod beamformer;
mod config;
mod coupling;

pub use beamformer::{
    build_reference_wave, coupling_strength, equivalent_reference_wave, holographic_beamformer, ideal_beamformer, neumann_decomposition,
    polarizability, system_matrix, NeumannTerms, ReferenceWave,
};
pub use config::{distance, GridSpec, HolographicPattern, Point, RhsConfig};
pub use coupling::{synthetic_kernel, CouplingModel, CouplingSource, SyntheticCoupling};
