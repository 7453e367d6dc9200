pub mod adaptive;
pub mod closed_testing;
pub mod dataset;
pub mod dunnett;
pub mod error;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
