pub mod acceptance;
pub mod config;
pub mod domain;
pub mod error;
pub mod euclid;
pub mod exact;
pub mod hyperbolic;
pub mod report;
pub mod run;
pub mod schreier;
pub mod series;
pub mod testfn;
pub mod zcover;

pub use error::{Error, Result};
