pub mod bva;
pub mod cli;
pub mod config;
pub mod error;
pub mod kinematics;
pub mod reaction;
pub mod relevance;
pub mod roots;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
