//! Numerical laboratory for the enstrophy envelopes of the 3D periodic
//! Navier-Stokes equations.
//!
//! - [`field`]: divergence-free spectral velocity fields and rough initial data.
//! - [`solver`]: integrating-factor RK4 pseudo-spectral time stepping.
//! - [`bounds`]: forward/backward Riccati envelopes and trajectory certification.
//! - [`dimension`]: packing counts and box-counting dimension fits on the line.
//! - [`lab`]: experiment configuration, persistence and composed pipelines.

pub mod bounds;
pub mod dimension;
pub mod fft;
pub mod field;
pub mod lab;
pub mod solver;
