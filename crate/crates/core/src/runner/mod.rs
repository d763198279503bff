//! Scenario files, the staged pipeline, its artifacts and the verification suite.

pub mod csvio;
pub mod grid;
pub mod pipeline;
pub mod report;
pub mod scenario;
pub mod verify;

pub use csvio::Table;
pub use pipeline::{run_basis, run_evolve, run_poles, run_timescales, Prepared};
pub use report::RunReport;
pub use scenario::Scenario;
