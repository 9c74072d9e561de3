pub mod approx;
pub mod boolfn;
pub mod bounds;
pub mod error;
pub mod num;
pub mod pattern;
pub mod protocols;

pub use error::{Error, Result};
