//! Files, reports and the batch commands behind the `projshape` binary.
//!
//! Every command is a pure function from parsed inputs and a [`RunConfig`]
//! to a [`Document`]; the binary only reads, writes and maps errors to exit
//! codes.

pub mod commands;
pub mod document;
pub mod files;

pub use commands::{coverage, mean_test, reconstruct, shape, simulate, RunConfig, Simulation};
pub use document::{fmt_f64, Document, Table};
pub use files::{CorrespondenceFile, PointsFile, ShapesFile};

pub const RECONSTRUCTION_KIND: &str = "reconstruction";
pub const MEAN_TEST_KIND: &str = "mean-test";
pub const COVERAGE_KIND: &str = "coverage";
