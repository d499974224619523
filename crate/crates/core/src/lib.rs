pub mod atf;
pub mod capacities;
pub mod embedfn;
pub mod error;
pub mod latticepaths;
pub mod numeric;
pub mod numtheory;
pub mod obstructions;
pub mod polygon;
pub mod staircases;

pub use error::{Error, Result};
