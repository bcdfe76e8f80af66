//! Hybrid quantum-classical physics-informed network solver.

pub mod autodiff;
pub mod cv;
pub mod dv;
pub mod nn;
pub mod pde;
pub mod telemetry;
pub mod train;
