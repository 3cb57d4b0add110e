pub mod adapt;
pub mod compose;
pub mod convert;
pub mod error;
pub mod examples;
pub mod game;
pub mod predecessor;
pub mod random;
pub mod simulate;
pub mod solver;
pub mod strategy;
pub mod template;
pub mod verify;

pub use error::{Error, Result};
