//! Point counts, character sums and limiting distributions for cyclic covers
//! `Y^r = α F(X)` of the projective line over prime fields.

pub mod arith;
pub mod asymptotics;
pub mod charsum;
pub mod cyclotomic;
pub mod dist;
pub mod error;
pub mod family;
pub mod field;
pub mod harness;
pub mod poly;

pub use error::{Error, Result};
