//! Simulation core for hybrid left-handed/right-handed transmission lines
//! coupled to a qubit.
//!
//! The pipeline runs bottom-up:
//!
//! * [`circuit`] describes the lumped network and builds the capacitance and
//!   inverse-inductance matrices of its Lagrangian.
//! * [`dispersion`] holds the closed-form ladder physics (band structure,
//!   infrared cutoff, density of modes, spectral density).
//! * [`modes`] solves the generalized eigenproblem and derives voltage,
//!   current and qubit-coupling spectra from the normal modes.
//! * [`dynamics`] evolves the rotating-wave single-excitation sector and
//!   computes bipartite entropies.
//! * [`spinboson`] runs the adiabatic renormalization of the qubit splitting
//!   and sweeps it across coupling and splitting.
//!
//! All quantities are SI; frequencies are angular (rad/s).

pub mod circuit;
pub mod dispersion;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod modes;
pub mod spinboson;
pub mod units;

pub use circuit::{
    apply_disorder, build_matrices, design_from_impedance, CellValues, CircuitSpec,
    NetworkMatrices, NodeLayout,
};
pub use dispersion::{
    dom_approx, invert_lhtl, omega_lhtl, omega_rhtl, spectral_density, BandPoint,
    SpectralDensityCurve,
};
pub use dynamics::{
    build_rwa_hamiltonian, entropy_minus_mode, entropy_qubit, entropy_scan, evolve,
    reduced_entropy, EntropyReport, Propagator, SingleExcitationState,
};
pub use error::{Error, Result};
pub use modes::{
    coupling_spectrum, current_average, dom_numeric, solve_modes, voltage_profile,
    CouplingNormalization, CouplingSpectrum, DomHistogram, ModeSet, QubitSpec, SpatialFactor,
};
pub use spinboson::{
    phase_diagram, renormalize, sweep_coupling, Jump, LambdaVariant, Phase, PhaseDiagram,
    RenormResult, SweepCurve, SweepResult,
};
