//! Random infinite power towers.
//!
//! Convergence classification for i.i.d. towers `A_1^(A_2^(A_3^…))`, special
//! functions on extended reals, Monte Carlo simulation and inverse tower laws.

pub mod alt;
pub mod classify;
pub mod cli;
pub mod error;
pub mod invtower;
pub mod sim;
pub mod stats;
pub mod verify;
pub mod xfun;

pub use error::{Error, Result};
