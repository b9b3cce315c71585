//! Numerical core for the radial Pekar problem on a ball `B_R` in three
//! dimensions: the energy functional with the Dirichlet Green kernel, its
//! unique positive minimizer, the angular-momentum sectors of the Hessian,
//! coercivity sampling, rearrangement inequalities and the large-radius limit.
//!
//! Everything here is `no_std` with `alloc`; IO lives in the `pekar` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod num;

pub mod asymptotics;
pub mod coercivity;
pub mod functional;
pub mod grid;
pub mod hessian;
pub mod linalg;
pub mod rearrange;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{inner, laplacian_sector, Boundary, ComplexRadial, RadialFunction, RadialGrid};
