//! Numerical geometric mechanics: Poisson structures, Hamiltonian flows,
//! exterior calculus on R^m, integrability audits and the closed-form
//! solutions of classical tops.
//!
//! Every index in the public API is 0-based. State vectors follow the
//! coordinate order documented on each catalog entry.

pub mod catalog;
pub mod coadjoint;
pub mod elliptic;
pub mod error;
pub mod exterior;
pub mod fields;
pub mod flows;
pub mod kowalewski;
pub mod poisson;

pub use error::{Error, Result};
pub use exterior::DifferentialForm;
pub use fields::{FdConfig, ScalarField, VectorField};
pub use flows::{Integrator, Trajectory};
pub use poisson::{AuditReport, HamiltonianSystem, PoissonStructure};
