//! Projective shape analysis from uncalibrated image pairs.
//!
//! The crate covers real projective space and frames ([`projective`]),
//! two-view reconstruction from matched pixels ([`camera`]), projective shape
//! coordinates and their embedding ([`shape`]), and nonparametric inference on
//! samples of shapes ([`stats`]). [`simulate`] and [`coverage`] generate
//! synthetic data, and [`io`] holds the file formats and batch commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod coverage;
pub mod error;
pub mod io;
pub mod linalg;
pub mod projective;
pub mod shape;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/projective.md")]
    mod projective {}
    #[doc = include_str!("../../../book/src/reconstruction.md")]
    mod reconstruction {}
    #[doc = include_str!("../../../book/src/shape.md")]
    mod shape {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/bootstrap.md")]
    mod bootstrap {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
