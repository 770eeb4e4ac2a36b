//! Eddy-viscosity closures for POD-Galerkin models of viscous Burgers flow,
//! discovered with proximal policy optimization.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! * [`fom_data`]: closed-form Burgers snapshots and the discrete inner product
//! * [`pod`]: POD basis, spectrum and RIC
//! * [`galerkin`]: Galerkin tensors, GP / closure / test-scale models, RK4
//! * [`env`]: the episodic closure environment and its two reward signals
//! * [`ppo`]: a dependency-free actor-critic PPO trainer
//! * [`eval`]: RMSE against the true projection and report tables

pub mod config;
pub mod env;
pub mod error;
pub mod eval;
pub mod fom_data;
pub mod galerkin;
pub mod io;
pub mod pod;
pub mod ppo;

pub use error::{Error, Result};
