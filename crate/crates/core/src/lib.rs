//! Pseudo-spectral implicit solver for the incompressible Navier-Stokes
//! equations on the two-dimensional torus, with Littlewood-Paley
//! diagnostics and Besov-norm error measurement.
//!
//! All numerics are generic over [`Real`]; the `*64` and `*32` aliases below
//! fix the scalar type.

pub mod error;
pub mod experiments;
pub mod littlewood_paley;
pub mod manufactured;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use littlewood_paley::{BesovIndex, Integrability, LittlewoodPaley, Summability};
pub use scalar::Real;
pub use solver::{ForcingTime, Solver, SolverConfig, Trajectory};
pub use spectral::{Grid2D, RealField, SpectralField, VectorField};

pub type RealField64 = RealField<f64>;
pub type SpectralField64 = SpectralField<f64>;
pub type VectorField64 = VectorField<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type Solver64<'a> = Solver<'a, f64>;
pub type Trajectory64 = Trajectory<f64>;

pub type RealField32 = RealField<f32>;
pub type SpectralField32 = SpectralField<f32>;
pub type VectorField32 = VectorField<f32>;
pub type SolverConfig32 = SolverConfig<f32>;
pub type Solver32<'a> = Solver<'a, f32>;
pub type Trajectory32 = Trajectory<f32>;
