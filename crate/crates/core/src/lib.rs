//! Exact construction and verification of dynamical reflection algebras.

pub mod builders;
pub mod checks;
pub mod exactfield;
pub mod models;
pub mod report;
pub mod shiftops;
pub mod tensor;
