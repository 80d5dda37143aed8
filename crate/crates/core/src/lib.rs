//! Simulation of a spin-orbit-torque neuron: stochastic macrospin dynamics
//! under a clock/write pulse protocol, Monte Carlo switching statistics, and a
//! resistive-crossbar network built from the neurons.

pub mod constants;
pub mod crossbar;
pub mod device;
pub mod error;
pub mod magnet;
pub mod montecarlo;
pub mod quadrature;
pub mod vec3;

pub use constants::PhysicalConstants;
pub use error::{Error, Result};
pub use vec3::Vec3;
