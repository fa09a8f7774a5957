//! Finite-scale verification of coarse maps between metric spaces and the
//! block-matrix algebras they induce.

pub mod cylinder;
pub mod error;
pub mod index;
pub mod label;
pub mod maps;
pub mod matrix;
pub mod metric;
pub mod pipeline;
pub mod generate;
pub mod jsonio;
pub mod report;
pub mod suite;
pub mod rotation;

pub use error::{Error, Result};
pub use label::Label;

