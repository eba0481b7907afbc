pub mod cli;
pub mod dihomotopy;
pub mod error;
pub mod flow;
pub mod homology;
pub mod poset;
pub mod presentation;
pub mod probe;
pub mod random;
pub mod simpset;

pub use error::{Error, Result};
