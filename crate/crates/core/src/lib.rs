//! Simulation and optimization toolkit for in-region location verification.
//!
//! A verifier observes the attenuations between a transmitter and a set of
//! base stations and must decide whether the transmitter is inside a region
//! of interest. This crate provides the pieces needed to study that problem
//! numerically:
//!
//! * [`geometry`]: map layouts, the region of interest and sampling.
//! * [`channel`] and [`shadowing`]: path loss and correlated log-normal
//!   shadowing fields.
//! * [`dataset`]: labeled attenuation datasets and feature normalization.
//! * [`nn`]: a small sigmoid network trained on cross entropy (in bits).
//! * [`np`]: the closed-form Neyman-Pearson test for the single-BS disk.
//! * [`eval`]: ROC curves, their area, averaging and complexity counts.
//! * [`planner`]: particle swarm optimization of base-station positions.
//!
//! The companion book in `book/` walks through each concept with runnable
//! snippets; those snippets are compiled and run as doc-tests of this crate.

pub mod channel;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod nn;
pub mod np;
pub mod planner;
pub mod seed;
pub mod shadowing;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/shadowing.md")]
    mod shadowing {}
    #[doc = include_str!("../../../book/src/dataset.md")]
    mod dataset {}
    #[doc = include_str!("../../../book/src/verifier.md")]
    mod verifier {}
    #[doc = include_str!("../../../book/src/np-test.md")]
    mod np_test {}
    #[doc = include_str!("../../../book/src/roc.md")]
    mod roc {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
