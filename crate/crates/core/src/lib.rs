pub mod analysis;
pub mod bh;
pub mod cli;
pub mod error;
pub mod graph;
pub mod hyplayout;
pub mod map;
pub mod matrix;
pub mod twist;

pub use error::{Error, Result};
