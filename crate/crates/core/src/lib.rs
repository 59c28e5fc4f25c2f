//! Analytics, an exact CTMC oracle and a regenerative simulator for batch
//! Poisson (`M^X/G/1`) queues that alternate between a working mode and a
//! general vacation mode.
//!
//! The central result implemented here is the decomposition of the
//! conditional queue-length PGF in the working mode,
//!
//! ```text
//! G1~(z) = P1~(z) / B^e(z) * Psi^e(z)
//! ```
//!
//! where `P1~` is the busy-conditional PGF of the ordinary `M^X/G/1` queue,
//! `B^e` the equilibrium batch PGF and `Psi^e` the equilibrium PGF of the
//! number of customers handed over at the end of a vacation.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel replication live in the `mxvac` crate.

#![no_std]
// When std is linked anywhere in the graph its inherent float methods shadow
// `num_traits::Float`, and the imports needed for bare no_std builds go unused.
#![allow(unused_imports)]

extern crate alloc;


pub mod batch;
pub mod ctmc;
mod error;
pub mod fft;
pub mod mxg1;
pub mod pgf;
pub mod pmf;
pub mod quad;
pub mod report;
pub mod series;
pub mod service;
pub mod sim;
pub mod vacation;

pub use batch::BatchLaw;
pub use error::{Error, Result};
pub use mxg1::{CycleQuantities, WorkingModeSpec, WorkingStateProbs};
pub use pgf::PgfHandle;
pub use pmf::Pmf;
pub use report::{Provenance, SteadyStateReport};
pub use service::ServiceLaw;
pub use vacation::{TransferLaw, VacationModelSpec};

pub use num_complex::Complex64;
