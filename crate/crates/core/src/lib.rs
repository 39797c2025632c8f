pub mod catalog;
pub mod census;
pub mod diophantine;
pub mod expansion;
pub mod error;
pub mod graph;
pub mod jet;
pub mod report;
pub mod surd;
pub mod tensor;
pub mod thermo;
pub mod transfer;
pub mod wick;

pub use error::{Error, Result};
