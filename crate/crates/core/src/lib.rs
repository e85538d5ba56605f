//! Spectral Faedo-Galerkin simulation of Darcy-Brinkman-Korteweg flow with
//! reactive solute transport on a rectangle.
//!
//! Concentration is expanded in Neumann cosine modes, velocity in an
//! exactly solenoidal no-slip basis built from stream functions. Nonlinear
//! terms are formed on a tensor Gauss-Legendre grid fine enough that every
//! Galerkin pairing is integrated exactly.

pub mod config;
pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod fields;
pub mod forcing;
pub mod korteweg;
pub mod ledger;
pub mod mobility;
pub mod oracles;
pub mod output;
pub mod pressure;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use domain::{build_domain, Domain, DomainSpec};
pub use error::{Error, Result};
pub use fields::{PressureField, ScalarField, VelocityField};
pub use forcing::ForcingSpec;
pub use korteweg::KortewegParams;
pub use ledger::{EnergyLedger, LedgerRow};
pub use mobility::Mobility;
pub use solver::{run, PhysicalParams, Problem, SimulationState, SolverConfig};
