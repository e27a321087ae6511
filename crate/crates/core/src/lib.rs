//! Dissipative dynamics of two qubits coupled through σx⊗σx (including
//! counter-rotating terms), each attached to its own Ohmic thermal bath.
//!
//! Units: angular frequencies in rad/ns, temperatures in mK, times in ns.
//! The bath exponent is x = Θ·ω/T with Θ = ħ·10⁹/k_B in mK per rad/ns.
//!
//! The computational basis is ordered |00⟩, |01⟩, |10⟩, |11⟩ (index
//! 2·q₁ + q₂); the energy eigenbasis is |a⟩, |b⟩, |c⟩, |d⟩ in increasing
//! energy.

pub mod bath;
pub mod cli;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numerics;

pub use bath::{rate_set, RateSet, Transition};
pub use dynamics::{
    build_liouvillian, evolve, evolve_with, propagate_populations_analytic, stationary_populations, steady_state, Basis,
    DensityMatrix, Liouvillian, StateReport, Trajectory,
};
pub use entanglement::{concurrence, concurrence_pure, stationary_concurrence, ConcurrenceResult};
pub use error::{Error, Result};
pub use experiments::{sweep_t1_t2, sweep_t_lambda, sweep_time_weight, Family, InitialStateSpec, SweepGrid};
pub use model::{eigensystem, EigenSystem, Level, SystemParams, UnitSystem, Variant};
pub use numerics::{CMatrix, Tolerances, C64};
