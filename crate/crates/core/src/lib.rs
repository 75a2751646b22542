//! Numerical laboratory for quantum entropic fluctuations in finite dimension.
//!
//! Modules are layered bottom up: [`numkernel`] supplies dense linear algebra,
//! [`qsystem`] builds open quantum systems, [`modular`] implements the modular
//! structure of a faithful state, [`functionals`] computes entropic
//! functionals and their measures, [`transfer`] handles alpha-Liouvilleans and
//! resonances, and [`classical`] is the Markov chain counterpart.

pub mod error;
pub mod numkernel;
pub mod qsystem;
pub mod modular;
pub mod functionals;
pub mod transfer;
pub mod classical;
pub mod report;
pub mod tolerances;

pub use error::{Error, Result};
