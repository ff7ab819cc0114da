//! Multiplicative boundary representations of free groups and their
//! induction to virtually free groups.

pub mod boundary_measure;
pub mod error;
pub mod exact;
pub mod induce;
pub mod io;
pub mod linalg;
pub mod multrep;
pub mod par;
pub mod scalar;
pub mod subgroups;
pub mod system;
pub mod words;

pub use error::{Error, ErrorClass, Result};
