pub mod choi;
pub mod classify;
pub mod cli;
pub mod error;
pub mod extension;
pub mod io;
pub mod lemmas;
pub mod states;
pub mod superop;
pub mod tensor;

pub use error::{Error, Result};
