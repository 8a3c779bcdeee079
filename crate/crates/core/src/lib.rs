//! Simulation of entanglement transfer in a tripartite photonic system:
//! one polarization qubit held by Alice, and a polarization (coin) qubit
//! plus an integer position qudit on Bob's photon, driven by a
//! discrete-time quantum walk on Bob's side only.
//!
//! The crate covers the full analysis chain:
//!
//! * [`hilbert`]: sparse tripartite pure states, ensembles for mixtures,
//!   per-position conditioning to 4×4 densities, polarization projections
//! * [`walk`]: coin/shift operators and walk evolution
//! * [`entanglement`]: correlation tensors, the generalized CHSH
//!   entanglement quantifier, average-entanglement curves, purity
//! * [`remote`]: classical reference mixtures, γ-interpolated conditioned
//!   position distributions, variance scans over polarization-angle grids
//! * [`tomography`]: projective measurement settings, finite-count
//!   sampling, linear-inversion state reconstruction, fidelity

pub mod entanglement;
pub mod hilbert;
pub mod remote;
pub mod tomography;
pub mod walk;

pub use hilbert::{
    Amplitude, Ensemble, Party, PolarizationAngle, Polarization, PositionDistribution,
    TripartiteState, TwoQubitDensity,
};
pub use walk::{CoinMatrix, CoinSpec, WalkConfig};
