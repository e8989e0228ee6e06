//! Certified homotopy continuation driven by Krawczyk's interval test.

pub mod analysis;
pub mod bench;
pub mod error;
pub mod homotopy;
pub mod interval;
pub mod krawczyk;
pub mod polysys;
pub mod tracker;

pub use error::{Error, Result};
