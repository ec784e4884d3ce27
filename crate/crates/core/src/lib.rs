//! Single-excitation physics of a coupled-resonator waveguide with one
//! embedded two-level atom, where every resonator and the atom leak into
//! their own bosonic reservoirs.
//!
//! The crate provides analytic scattering amplitudes and bound states,
//! Wigner-Weisskopf decay rates, exact time evolution (closed form for the
//! bare damped chain, ODE integration otherwise) and a dense
//! diagonalization oracle used to cross-check all analytic results.

pub mod bound_states;
pub mod decay;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod report;
pub mod scattering;

pub use bound_states::{Branch, BoundState, BoundReport, Normalization};
pub use decay::{DressedState, MemoryFunction, WeightMode};
pub use dynamics::{DecayFit, EvolveOptions, Method, Trajectory};
pub use error::{Error, Result};
pub use model::{
    BasisLabel, BathMode, BathSpec, Boundary, DissipationRates, HamiltonianMatrix, SystemParams,
};
pub use oracle::EigenDecomposition;
pub use scattering::{ScatteringSolution, SpectrumRow, SpectrumTable};
