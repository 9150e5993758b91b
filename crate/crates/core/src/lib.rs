pub mod acquisition;
pub mod bo;
pub mod chem;
pub mod cli;
pub mod config;
pub mod error;
pub mod ga;
pub mod gp;
pub mod objectives;
pub mod pitfalls;
pub mod rng;

pub use error::{Error, Result};
