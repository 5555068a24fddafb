//! Bi-Hamiltonian structures for Euler equations on the circle diffeomorphism
//! group: spectral grid functions, Lie–Poisson and cocycle operators, Lenard
//! ladders, Euler flows, admissibility scans and low-degree cohomology checks.

pub mod classification;
pub mod cli;
pub mod cohomology;
pub mod error;
pub mod flow;
pub mod fourier;
pub mod functionals;
pub mod hierarchy;
pub mod io;
pub mod lie_ops;
pub mod verify;

pub use error::{Error, Result};
pub use fourier::{GridFunction, Spectrum};
pub use lie_ops::{AffinePart, CocycleOperator, InertiaOperator};
