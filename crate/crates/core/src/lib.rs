pub mod bernstein;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod density;
pub mod dirichlet;
pub mod error;
pub mod io;
pub mod kernels;
pub mod levy_model;
pub mod quadrature;
pub mod rate;
mod roots;
pub mod simulate;

pub use error::{Error, Result};
