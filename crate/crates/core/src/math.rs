//! Transcendental functions for `no_std` builds.

pub(crate) use libm::{cos, exp, expm1, log, pow, sin, sqrt, tanh};

pub(crate) const PI: f64 = core::f64::consts::PI;

/// First positive Neumann eigenvalue on (0,1).
pub const LAMBDA1: f64 = PI * PI;
