//! Dense simulation toolkit for information scrambling in small open quantum
//! systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`] holds the complex linear algebra and the validated state and
//!   operator types every other module works with.
//! * [`models`] builds the SYK, Maldacena–Qi, XXX, mixed-field Ising and LMG
//!   Hamiltonians together with their disorder ensembles and initial states.
//! * [`dynamics`] evolves states under the dephasing master equation, either
//!   through its Fock–Liouville generator or through an independent RK4
//!   integrator.
//! * [`observables`] turns trajectories into mutual-information, coherence and
//!   OTOC series and averages them over disorder.
//! * [`thermolab`] simulates a closed system + environment universe exactly and
//!   evaluates two-time-measurement statistics, the integral fluctuation
//!   theorem and the entropy-production ledger.
//!
//! Units are ħ = 1 with energies in units of the coupling `J`; all entropies are
//! in nats.

// Links the OpenBLAS backend used by `ndarray` matrix products.
extern crate blas_src;

pub mod dynamics;
pub mod error;
pub mod models;
pub mod observables;
pub mod qcore;
pub mod thermolab;

pub use error::{Error, Result};
pub use qcore::{Basis, CMatrix, DensityMatrix, HermitianOperator, Partition, C64};
