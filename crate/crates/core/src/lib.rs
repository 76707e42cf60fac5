pub mod analysis;
pub mod error;
pub mod policies;
pub mod reward_models;
pub mod simulator;

pub use error::{GmabError, Result};
