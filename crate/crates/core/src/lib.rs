//! Entanglement dynamics of two coupled harmonic oscillators after a sudden
//! frequency quench.
//!
//! The numeric path evolves the covariance matrix of the Gaussian state
//! ([`dynamics`]) and reads the entanglement entropy off the reduced
//! single-oscillator covariance ([`symplectic`]). The analytic path builds
//! the same entropy from Ermakov scale factors ([`analytic`]). [`fitting`]
//! post-processes the trajectories, and [`scenario`], [`runner`] and [`plot`]
//! drive batch runs from a configuration file.

pub mod analytic;
pub mod dynamics;
pub mod error;
pub mod fitting;
pub mod plot;
pub mod runner;
pub mod scenario;
pub mod symplectic;

pub use error::{Error, Result};
