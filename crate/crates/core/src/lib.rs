// `!(x <= tol)` rejects NaN; the negated form is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod linalg;
pub mod modes;
pub mod runner;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
