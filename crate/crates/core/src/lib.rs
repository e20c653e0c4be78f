//! Numerical core for reaction-diffusion-ODE systems with a fast-diffusing
//! species and their shadow-limit reductions.
//!
//! Everything here is `no_std` with `alloc`; file formats, configuration and
//! the command line live in the `shadowlab` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod basis;
pub mod expr;
pub mod fullsolve;
mod math;
pub mod model;
pub mod shadow;
pub mod stability;
pub mod zoo;

pub use math::LAMBDA1;
