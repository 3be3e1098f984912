//! Field- and time-normalized impact indicators for sparse mention data.
//!
//! The crate turns publication records with per-source mention counts
//! (citations, tweets) into stratified 2x2 tables and computes three
//! indicators against the world reference set:
//!
//! * EMNPC, the ratio of equalized mentioned proportions,
//! * MNPC, the mean of per-paper reciprocal world proportions,
//! * MHq, the Mantel-Haenszel pooled odds ratio,
//!
//! each with a closed-form or percentile-bootstrap confidence interval.
//!
//! Modules follow the data flow: [`ingest`] parses files into
//! [`cohort::PublicationRecord`]s, [`cohort`] assigns quality groups and
//! tabulates strata, [`indicator`] holds the formulas, [`bootstrap`]
//! resamples, [`synth`] generates calibrated synthetic data, and
//! [`report`] runs the whole pipeline for the command-line tool.

pub mod analysis;
pub mod bootstrap;
pub mod cohort;
pub mod error;
pub mod indicator;
pub mod ingest;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
