//! Finite-window coarse geometry and uniform Roe algebra computations.

pub mod cli;
pub mod cobounded;
pub mod embeddings;
pub mod error;
pub mod io;
pub mod maps;
pub mod operators;
pub mod par;
pub mod spaces;

pub use error::{Error, Result};
