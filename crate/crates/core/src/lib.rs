pub mod buyer;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod lp;
pub mod market;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod rational;
pub mod seller;

pub use error::{Error, Result};
pub use rational::{Vector, Q};
