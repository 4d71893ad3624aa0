//! Periodically driven, non-Hermitian, spin-orbit-coupled boson in a double
//! well.
//!
//! The four basis states are `|0,up>` (right well, spin up), `|down,0>`
//! (left, down), `|up,0>` (left, up) and `|0,down>` (right, down). The crate
//! offers exact RK4 propagation of the driven equations, the closed-form
//! Floquet spectrum of the high-frequency effective model, stability
//! classification and parameter scans.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases below fix the scalar.

pub mod bessel;
pub mod checkpoints;
pub mod comparison;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod roots;
pub mod scalar;
pub mod stability;

pub use bessel::{bessel_j, bessel_jn, BesselOrder};
pub use comparison::{
    asymptotic_total_probability, compare_trajectories, AsymptoticEstimate, DeviationReport,
};
pub use error::{Error, Result};
pub use integrator::{
    monodromy, numerical_quasienergies, propagate, rhs, IntegrationConfig, Trajectory,
};
pub use model::{
    analytic_evolution, effective_couplings, effective_matrix, floquet_state_amplitudes,
    non_floquet_solution, quasienergies, EffectiveCouplings, FloquetSolutionSet, Parity,
    QuasienergyMode, StateVector, SystemParams,
};
pub use scalar::Real;
pub use stability::{
    boundary_beta, classify, equilibrium_check, rho_even, rho_odd, scan, StabilityCase,
    StabilityVerdict,
};

pub type SystemParamsF64 = SystemParams<f64>;
pub type SystemParamsF32 = SystemParams<f32>;
pub type EffectiveCouplingsF64 = EffectiveCouplings<f64>;
pub type EffectiveCouplingsF32 = EffectiveCouplings<f32>;
pub type StateVectorF64 = StateVector<f64>;
pub type StateVectorF32 = StateVector<f32>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type QuasienergyModeF64 = QuasienergyMode<f64>;
pub type IntegrationConfigF64 = IntegrationConfig<f64>;
pub type StabilityVerdictF64 = StabilityVerdict<f64>;
pub type ScanGridF64 = stability::ScanGrid<f64>;
pub type ScanGridF32 = stability::ScanGrid<f32>;
